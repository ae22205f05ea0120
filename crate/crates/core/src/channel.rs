//! Single-path mmWave link synthesis: array responses, LOS probability,
//! dual-slope path loss, log-normal shadowing and the rank-one channel matrix.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrayKind {
    /// Uniform linear array along the y axis.
    UlaY { n: usize },
    /// Uniform planar array in the yz plane, `w` elements along y and `h` along z.
    UpaYz { w: usize, h: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub kind: ArrayKind,
    pub spacing_over_wavelength: f64,
}

impl ArrayGeometry {
    pub fn ula(n: usize) -> Self {
        Self {
            kind: ArrayKind::UlaY { n },
            spacing_over_wavelength: 0.5,
        }
    }

    pub fn upa(w: usize, h: usize) -> Self {
        Self {
            kind: ArrayKind::UpaYz { w, h },
            spacing_over_wavelength: 0.5,
        }
    }

    pub fn n_elements(&self) -> usize {
        match self.kind {
            ArrayKind::UlaY { n } => n,
            ArrayKind::UpaYz { w, h } => w * h,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_elements() == 0 {
            return Err(Error::InvalidGeometry("array needs at least one element".into()));
        }
        if !(self.spacing_over_wavelength > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "element spacing must be positive, got {}",
                self.spacing_over_wavelength
            )));
        }
        Ok(())
    }

    /// Azimuth-only response; a UPA is steered at zero elevation offset.
    pub fn response(&self, phi: f64) -> Vec<C64> {
        match self.kind {
            ArrayKind::UlaY { n } => ula_response(n, self.spacing_over_wavelength, phi),
            ArrayKind::UpaYz { w, h } => upa_response(w, h, self.spacing_over_wavelength, phi, 0.0),
        }
    }
}

/// Response of an `n`-element ULA toward azimuth `phi` (radians from broadside).
pub fn ula_response(n: usize, spacing_over_wavelength: f64, phi: f64) -> Vec<C64> {
    let scale = 1.0 / (n as f64).sqrt();
    let step = 2.0 * PI * spacing_over_wavelength * phi.sin();
    (0..n)
        .map(|i| C64::from_polar(scale, step * i as f64))
        .collect()
}

/// Response of a `w × h` UPA in the yz plane; element `(m, n)` sits at index `m·h + n`.
pub fn upa_response(w: usize, h: usize, spacing_over_wavelength: f64, phi: f64, theta: f64) -> Vec<C64> {
    let scale = 1.0 / ((w * h) as f64).sqrt();
    let kd = 2.0 * PI * spacing_over_wavelength;
    let (sy, sz) = (phi.sin() * theta.cos(), phi.sin() * theta.sin());
    (0..w)
        .flat_map(|m| (0..h).map(move |n| C64::from_polar(scale, kd * (m as f64 * sy + n as f64 * sz))))
        .collect()
}

/// Probability that a link of horizontal length `r` metres is line-of-sight.
pub fn los_probability(r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidGeometry(format!("link distance must be positive, got {r}")));
    }
    let decay = (-r / 63.0).exp();
    let p = (18.0 / r).min(1.0) * (1.0 - decay) + decay;
    Ok(p.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkState {
    Los,
    Nlos,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagationParams {
    pub kappa_los_db: f64,
    pub kappa_nlos_db: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    pub sigma_v_los_db: f64,
    pub sigma_v_nlos_db: f64,
    pub mu_v_db: f64,
    /// Half-width of the uniform angular offset applied to NLOS departure and arrival angles.
    pub nlos_angle_spread_deg: f64,
}

impl Default for PropagationParams {
    fn default() -> Self {
        Self {
            kappa_los_db: 61.4,
            kappa_nlos_db: 72.0,
            alpha_los: 2.0,
            alpha_nlos: 3.3,
            sigma_v_los_db: 5.8,
            sigma_v_nlos_db: 8.7,
            mu_v_db: 0.0,
            nlos_angle_spread_deg: 15.0,
        }
    }
}

impl PropagationParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [("alpha_los", self.alpha_los), ("alpha_nlos", self.alpha_nlos)];
        for (field, v) in positive {
            if !(v > 0.0) {
                return Err(Error::config(field, format!("path-loss exponent must be > 0, got {v}")));
            }
        }
        let non_negative = [
            ("sigma_v_los_db", self.sigma_v_los_db),
            ("sigma_v_nlos_db", self.sigma_v_nlos_db),
            ("nlos_angle_spread_deg", self.nlos_angle_spread_deg),
        ];
        for (field, v) in non_negative {
            if !(v >= 0.0) {
                return Err(Error::config(field, format!("must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    fn for_state(&self, state: LinkState) -> (f64, f64, f64) {
        match state {
            LinkState::Los => (self.kappa_los_db, self.alpha_los, self.sigma_v_los_db),
            LinkState::Nlos => (self.kappa_nlos_db, self.alpha_nlos, self.sigma_v_nlos_db),
        }
    }
}

/// Power-domain path loss in dB; distances under 1 m use the 1 m intercept.
pub fn path_loss_db(r: f64, state: LinkState, params: &PropagationParams) -> f64 {
    let (kappa, alpha, _) = params.for_state(state);
    kappa + 10.0 * alpha * r.max(1.0).log10()
}

/// Amplitude-domain loss: the square root of the linear power loss.
pub fn amplitude_path_loss(r: f64, state: LinkState, params: &PropagationParams) -> f64 {
    10f64.powf(path_loss_db(r, state, params) / 20.0)
}

/// Linear power factor `v` with `10·log10(v) ~ N(mu_db, sigma_db²)`.
pub fn sample_shadowing<R: Rng + ?Sized>(rng: &mut R, mu_db: f64, sigma_db: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    10f64.powf((mu_db + sigma_db * z) / 10.0)
}

/// Wraps an angle into (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let mut x = a.rem_euclid(2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    }
    x
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkRealization {
    pub link_state: LinkState,
    pub complex_gain: C64,
    pub amplitude_path_loss: f64,
    pub shadow_factor: f64,
    pub aod_rad: f64,
    pub aoa_rad: f64,
}

impl LinkRealization {
    /// Large- and small-scale power gain `|α|²·v / p²` seen with unit array gain.
    pub fn power_gain(&self) -> f64 {
        self.complex_gain.norm_sqr() * self.shadow_factor / (self.amplitude_path_loss * self.amplitude_path_loss)
    }
}

/// Draws one single-path link for a receiver `distance` metres away at azimuth
/// `bearing` from the transmitter's broadside.
pub fn draw_link<R: Rng + ?Sized>(
    rng: &mut R,
    distance: f64,
    bearing: f64,
    params: &PropagationParams,
) -> Result<LinkRealization> {
    let p_los = los_probability(distance)?;
    // Fixed draw layout per link keeps every stream aligned regardless of outcome.
    let u_los: f64 = rng.random();
    let shadow_z: f64 = StandardNormal.sample(rng);
    let g_re: f64 = StandardNormal.sample(rng);
    let g_im: f64 = StandardNormal.sample(rng);
    let off_t: f64 = rng.random_range(-1.0..=1.0);
    let off_r: f64 = rng.random_range(-1.0..=1.0);

    let link_state = if u_los < p_los { LinkState::Los } else { LinkState::Nlos };
    let (_, _, sigma) = params.for_state(link_state);
    let shadow_factor = 10f64.powf((params.mu_v_db + sigma * shadow_z) / 10.0);
    let complex_gain = C64::new(g_re, g_im) * std::f64::consts::FRAC_1_SQRT_2;
    let spread = match link_state {
        LinkState::Los => 0.0,
        LinkState::Nlos => params.nlos_angle_spread_deg.to_radians(),
    };
    Ok(LinkRealization {
        link_state,
        complex_gain,
        amplitude_path_loss: amplitude_path_loss(distance, link_state, params),
        shadow_factor,
        aod_rad: wrap_angle(bearing + spread * off_t),
        aoa_rad: wrap_angle(bearing + PI + spread * off_r),
    })
}

/// Rank-one channel `sqrt(N_t·N_r)·(α·sqrt(v)/p)·a_r(φ_r)·a_t(φ_t)^H`, shape `N_r × N_t`.
pub fn channel_matrix(link: &LinkRealization, tx: &ArrayGeometry, rx: &ArrayGeometry) -> ComplexMatrix {
    let a_t = tx.response(link.aod_rad);
    let a_r = rx.response(link.aoa_rad);
    let array_scale = ((tx.n_elements() * rx.n_elements()) as f64).sqrt();
    let coeff = link.complex_gain * (array_scale * link.shadow_factor.sqrt() / link.amplitude_path_loss);
    ComplexMatrix::outer(&a_r, &a_t, coeff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::SeedTree;
    use approx::assert_abs_diff_eq;

    fn norm(v: &[C64]) -> f64 {
        v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn ula_examples() {
        assert_eq!(ula_response(1, 0.5, 0.7), vec![C64::new(1.0, 0.0)]);
        for z in ula_response(16, 0.5, 0.0) {
            assert_abs_diff_eq!(z.re, 0.25, epsilon = 1e-15);
            assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-15);
        }
        let v = ula_response(2, 0.5, PI / 2.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v[0] - C64::new(s, 0.0)).norm() < 1e-12);
        assert!((v[1] - C64::new(-s, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn upa_examples() {
        assert_eq!(upa_response(1, 1, 0.5, 0.4, 2.0), vec![C64::new(1.0, 0.0)]);
        for z in upa_response(2, 2, 0.5, 0.0, 1.1) {
            assert!((z - C64::new(0.5, 0.0)).norm() < 1e-15);
        }
        let v = upa_response(2, 1, 0.5, PI / 2.0, 0.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v[0] - C64::new(s, 0.0)).norm() < 1e-12);
        assert!((v[1] - C64::new(-s, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn upa_single_row_matches_ula() {
        let a = upa_response(8, 1, 0.5, 0.3, 0.0);
        let b = ula_response(8, 0.5, 0.3);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-14);
        }
        assert!((norm(&upa_response(4, 3, 0.5, 0.9, 0.2)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn los_probability_examples() {
        assert_eq!(los_probability(10.0).unwrap(), 1.0);
        assert_eq!(los_probability(18.0).unwrap(), 1.0);
        assert_abs_diff_eq!(los_probability(63.0).unwrap(), 0.5485, epsilon = 1e-4);
        assert!(los_probability(0.0).is_err());
        assert!(los_probability(-3.0).is_err());
    }

    #[test]
    fn path_loss_examples() {
        let p = PropagationParams::default();
        assert_abs_diff_eq!(path_loss_db(1.0, LinkState::Los, &p), 61.4, epsilon = 1e-12);
        assert_abs_diff_eq!(path_loss_db(100.0, LinkState::Los, &p), 101.4, epsilon = 1e-12);
        assert_abs_diff_eq!(path_loss_db(1.0, LinkState::Nlos, &p), 72.0, epsilon = 1e-12);
        // clamped under 1 m
        assert_eq!(path_loss_db(0.2, LinkState::Los, &p), 61.4);
        let amp = amplitude_path_loss(100.0, LinkState::Los, &p);
        assert_abs_diff_eq!(20.0 * amp.log10(), 101.4, epsilon = 1e-10);
    }

    #[test]
    fn shadowing_degenerate_and_moments() {
        let mut rng = SeedTree::new(1).rng("shadow", &[]);
        assert_eq!(sample_shadowing(&mut rng, 0.0, 0.0), 1.0);
        assert_abs_diff_eq!(sample_shadowing(&mut rng, 3.0, 0.0), 1.9953, epsilon = 1e-4);
        let n = 100_000;
        let mean_db = (0..n)
            .map(|_| 10.0 * sample_shadowing(&mut rng, 0.0, 8.0).log10())
            .sum::<f64>()
            / n as f64;
        assert!(mean_db.abs() < 0.1, "mean {mean_db}");
    }

    #[test]
    fn channel_matrix_examples() {
        let link = LinkRealization {
            link_state: LinkState::Los,
            complex_gain: C64::new(1.0, 0.0),
            amplitude_path_loss: 1.0,
            shadow_factor: 1.0,
            aod_rad: 0.0,
            aoa_rad: PI,
        };
        let h = channel_matrix(&link, &ArrayGeometry::ula(16), &ArrayGeometry::ula(1));
        assert_eq!((h.rows(), h.cols()), (1, 16));
        for z in h.as_slice() {
            assert!((z - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
        let zero = LinkRealization {
            complex_gain: C64::new(0.0, 0.0),
            ..link
        };
        let h0 = channel_matrix(&zero, &ArrayGeometry::ula(16), &ArrayGeometry::ula(1));
        assert!(h0.as_slice().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn near_links_are_always_los() {
        let p = PropagationParams::default();
        for i in 0..200 {
            let mut rng = SeedTree::new(9).rng("link", &[i]);
            let l = draw_link(&mut rng, 10.0, 0.3, &p).unwrap();
            assert_eq!(l.link_state, LinkState::Los);
            assert_eq!(l.aod_rad, 0.3);
        }
    }

    #[test]
    fn nlos_angles_stay_within_spread() {
        let p = PropagationParams::default();
        let spread = p.nlos_angle_spread_deg.to_radians();
        let mut seen_nlos = false;
        for i in 0..500 {
            let mut rng = SeedTree::new(2).rng("link", &[i]);
            let l = draw_link(&mut rng, 90.0, 0.5, &p).unwrap();
            if l.link_state == LinkState::Nlos {
                seen_nlos = true;
                assert!((l.aod_rad - 0.5).abs() <= spread + 1e-12);
            }
            assert!(l.aod_rad > -PI && l.aod_rad <= PI);
            assert!(l.aoa_rad > -PI && l.aoa_rad <= PI);
        }
        assert!(seen_nlos);
    }

    #[test]
    fn wrap_angle_range() {
        assert_abs_diff_eq!(wrap_angle(PI), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_angle(-PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_angle(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-12);
    }
}
