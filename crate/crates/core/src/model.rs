//! Physical parameters of the router and the single-site quantities derived
//! from them: lead dispersion, complex wavevectors, the atomic potential
//! `V(E)` with its poles, and the effective site energy of the symmetric
//! channel.
//!
//! Energies are measured in units of the waveguide hopping (default `xi = 1`).
//! The hopping enters with a minus sign, so a waveguide with cavity
//! frequency `omega` and hopping `xi` carries the band `omega - 2 xi cos k`.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const DEFAULT_EPS_POLE: f64 = 1e-12;
pub const DEFAULT_EPS_EDGE: f64 = 1e-9;

/// Thresholds used to decide when a value sits on a pole or a band edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative pole threshold; the absolute threshold at energy `E` is
    /// `eps_pole * max(1, E^2)`.
    pub eps_pole: f64,
    /// Minimum distance of `cos k` from `+-1` before a band edge is reported.
    pub eps_edge: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eps_pole: DEFAULT_EPS_POLE,
            eps_edge: DEFAULT_EPS_EDGE,
        }
    }
}

/// Parameters of two coupled-resonator waveguides joined by `n_atoms`
/// driven three-level atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct RouterConfig {
    pub omega_a: f64,
    pub omega_b: f64,
    pub xi_a: f64,
    pub xi_b: f64,
    pub g_a: f64,
    pub g_b: f64,
    pub omega_e: f64,
    /// Third-level energy, already in the frame rotating with the drive.
    pub omega_s: f64,
    /// Drive frequency. Only used when `apply_nu` is set, in which case the
    /// third level sits at `omega_s + nu`.
    pub nu: f64,
    pub apply_nu: bool,
    /// Rabi frequency of the classical drive (real, non-negative).
    pub rabi: f64,
    pub n_atoms: usize,
    pub tolerances: Tolerances,
}

impl Default for RouterConfig {
    fn default() -> Self {
        Self {
            omega_a: 0.0,
            omega_b: 0.0,
            xi_a: 1.0,
            xi_b: 1.0,
            g_a: 0.5,
            g_b: 0.5,
            omega_e: 0.0,
            omega_s: 0.0,
            nu: 0.0,
            apply_nu: false,
            rabi: 0.0,
            n_atoms: 5,
            tolerances: Tolerances::default(),
        }
    }
}

impl RouterConfig {
    /// Equal-parameter configuration: both waveguides at `omega0` with unit
    /// hopping and the same coupling `g` to every atom.
    pub fn symmetric(omega0: f64, g: f64, n_atoms: usize) -> Self {
        Self {
            omega_a: omega0,
            omega_b: omega0,
            g_a: g,
            g_b: g,
            n_atoms,
            ..Self::default()
        }
    }

    pub fn with_rabi(mut self, rabi: f64) -> Self {
        self.rabi = rabi;
        self
    }

    pub fn with_n_atoms(mut self, n_atoms: usize) -> Self {
        self.n_atoms = n_atoms;
        self
    }

    pub fn with_levels(mut self, omega_e: f64, omega_s: f64) -> Self {
        self.omega_e = omega_e;
        self.omega_s = omega_s;
        self
    }

    pub fn with_coupling(mut self, g: f64) -> Self {
        self.g_a = g;
        self.g_b = g;
        self
    }

    /// The same device with the roles of waveguides `a` and `b` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            omega_a: self.omega_b,
            omega_b: self.omega_a,
            xi_a: self.xi_b,
            xi_b: self.xi_a,
            g_a: self.g_b,
            g_b: self.g_a,
            ..self.clone()
        }
    }

    pub fn omega_s_effective(&self) -> f64 {
        if self.apply_nu {
            self.omega_s + self.nu
        } else {
            self.omega_s
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("omega_a", self.omega_a),
            ("omega_b", self.omega_b),
            ("xi_a", self.xi_a),
            ("xi_b", self.xi_b),
            ("g_a", self.g_a),
            ("g_b", self.g_b),
            ("omega_e", self.omega_e),
            ("omega_s", self.omega_s),
            ("nu", self.nu),
            ("rabi", self.rabi),
        ];
        for (name, value) in finite {
            if !value.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        let checks = [
            (self.xi_a > 0.0, "xi_a > 0"),
            (self.xi_b > 0.0, "xi_b > 0"),
            (self.n_atoms >= 1, "n_atoms ≥ 1"),
            (self.rabi >= 0.0, "rabi ≥ 0"),
            (self.g_a >= 0.0, "g_a ≥ 0"),
            (self.g_b >= 0.0, "g_b ≥ 0"),
            (self.tolerances.eps_pole > 0.0, "eps_pole > 0"),
            (self.tolerances.eps_edge > 0.0, "eps_edge > 0"),
        ];
        for (ok, constraint) in checks {
            if !ok {
                return Err(Error::InvalidParameter(constraint.to_string()));
            }
        }
        Ok(())
    }

    /// Checks that the symmetric/antisymmetric decomposition applies, i.e.
    /// both waveguides and both couplings are identical.
    pub fn require_symmetric(&self) -> Result<()> {
        if self.omega_a != self.omega_b {
            return Err(Error::ClosedFormUnavailable("omega_a != omega_b"));
        }
        if self.xi_a != self.xi_b {
            return Err(Error::ClosedFormUnavailable("xi_a != xi_b"));
        }
        if self.g_a != self.g_b {
            return Err(Error::ClosedFormUnavailable("g_a != g_b"));
        }
        Ok(())
    }

    pub fn is_symmetric(&self) -> bool {
        self.require_symmetric().is_ok()
    }

    /// Open energy band of waveguide `a`, the incident channel.
    pub fn band_a(&self) -> (f64, f64) {
        (
            self.omega_a - 2.0 * self.xi_a,
            self.omega_a + 2.0 * self.xi_a,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Propagating,
    Evanescent,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Propagating => "propagating",
            Branch::Evanescent => "evanescent",
        }
    }
}

/// Lattice wavenumber, possibly complex.
///
/// Propagating modes have `0 < k < pi`. Evanescent modes have `Im k > 0` and
/// `Re k` equal to `0` or `pi`, so `exp(i k j)` decays as `j -> +inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveVector {
    pub k: Complex64,
    pub branch: Branch,
}

impl WaveVector {
    /// Wavevector with the given `cos k`, choosing the decaying branch when
    /// `|cos k| > 1`. No band-edge check.
    pub fn from_cos(cos_k: f64) -> Self {
        if cos_k.abs() < 1.0 {
            Self {
                k: Complex64::new(cos_k.acos(), 0.0),
                branch: Branch::Propagating,
            }
        } else {
            let kappa = cos_k.abs().acosh();
            let re = if cos_k > 0.0 { 0.0 } else { PI };
            Self {
                k: Complex64::new(re, kappa),
                branch: Branch::Evanescent,
            }
        }
    }

    /// Decay constant `Im k` (zero for propagating modes).
    pub fn kappa(&self) -> f64 {
        self.k.im
    }

    /// `exp(i k)`, evaluated without cancellation on the evanescent branch.
    pub fn bloch_factor(&self) -> Complex64 {
        match self.branch {
            Branch::Propagating => Complex64::new(self.k.re.cos(), self.k.re.sin()),
            Branch::Evanescent => {
                let mag = (-self.k.im).exp();
                if self.k.re == 0.0 {
                    Complex64::new(mag, 0.0)
                } else {
                    Complex64::new(-mag, 0.0)
                }
            }
        }
    }

    /// Group velocity `2 xi sin k`; zero for evanescent modes, which carry no flux.
    pub fn group_velocity(&self, xi: f64) -> f64 {
        match self.branch {
            Branch::Propagating => 2.0 * xi * self.k.re.sin(),
            Branch::Evanescent => 0.0,
        }
    }
}

/// `omega - 2 xi cos k`.
pub fn dispersion_energy(k: f64, omega: f64, xi: f64) -> f64 {
    omega - 2.0 * xi * k.cos()
}

/// Inverse of [`dispersion_energy`]: the wavevector of a mode at energy `E`
/// in a chain with site energy `omega` and hopping `xi`.
pub fn wavevector_from_energy(
    energy: f64,
    omega: f64,
    xi: f64,
    eps_edge: f64,
) -> Result<WaveVector> {
    let cos_k = (omega - energy) / (2.0 * xi);
    if (cos_k - 1.0).abs() < eps_edge || (cos_k + 1.0).abs() < eps_edge {
        return Err(Error::BandEdge {
            energy,
            cos_k,
            eps: eps_edge,
        });
    }
    Ok(WaveVector::from_cos(cos_k))
}

/// A real quantity that may sit on a pole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PoleValue {
    Finite(f64),
    Pole,
}

impl PoleValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            PoleValue::Finite(v) => Some(v),
            PoleValue::Pole => None,
        }
    }

    pub fn is_pole(self) -> bool {
        matches!(self, PoleValue::Pole)
    }
}

fn pole_threshold(energy: f64, cfg: &RouterConfig) -> f64 {
    cfg.tolerances.eps_pole * (energy * energy).max(1.0)
}

/// Potential seen by a waveguide photon after eliminating the atomic
/// amplitudes: `(E - ws) / ((E - ws)(E - we) - rabi^2)`.
///
/// Without drive the third level decouples and the reduced form
/// `1 / (E - we)` is used, so `E = ws` is not reported as a pole.
pub fn potential(energy: f64, cfg: &RouterConfig) -> PoleValue {
    let eps = pole_threshold(energy, cfg);
    let detuning_e = energy - cfg.omega_e;
    if cfg.rabi == 0.0 {
        return if detuning_e.abs() < eps {
            PoleValue::Pole
        } else {
            PoleValue::Finite(1.0 / detuning_e)
        };
    }
    let detuning_s = energy - cfg.omega_s_effective();
    let denom = detuning_s * detuning_e - cfg.rabi * cfg.rabi;
    if denom.abs() < eps {
        PoleValue::Pole
    } else {
        PoleValue::Finite(detuning_s / denom)
    }
}

/// Roots `(E+, E-)` of the denominator of [`potential`], `E+ >= E-`.
pub fn poles(cfg: &RouterConfig) -> (f64, f64) {
    let we = cfg.omega_e;
    let ws = cfg.omega_s_effective();
    let d = (we - ws).hypot(2.0 * cfg.rabi);
    ((we + ws + d) / 2.0, (we + ws - d) / 2.0)
}

/// Genuine singularities of [`potential`], highest first. Degenerate poles
/// are reported once, and the removable root at `E = ws` is dropped when
/// the drive is off.
pub fn active_poles(cfg: &RouterConfig) -> Vec<f64> {
    if cfg.rabi == 0.0 {
        return vec![cfg.omega_e];
    }
    let (hi, lo) = poles(cfg);
    if hi == lo {
        vec![hi]
    } else {
        vec![hi, lo]
    }
}

/// Site energy `omega0 + 2 g^2 V(E)` of the symmetric channel inside the
/// scattering region.
pub fn effective_site_energy(energy: f64, cfg: &RouterConfig) -> Result<PoleValue> {
    cfg.require_symmetric()?;
    let g = cfg.g_a;
    if g == 0.0 {
        return Ok(PoleValue::Finite(cfg.omega_a));
    }
    Ok(match potential(energy, cfg) {
        PoleValue::Finite(v) => PoleValue::Finite(cfg.omega_a + 2.0 * g * g * v),
        PoleValue::Pole => PoleValue::Pole,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn dispersion_examples() {
        assert!(close(dispersion_energy(PI / 2.0, 0.0, 1.0), 0.0, 1e-15));
        assert_eq!(dispersion_energy(0.0, 0.0, 1.0), -2.0);
        assert!(close(dispersion_energy(PI / 3.0, 0.5, 1.0), -0.5, 1e-15));
    }

    #[test]
    fn wavevector_examples() {
        let k = wavevector_from_energy(0.0, 0.0, 1.0, DEFAULT_EPS_EDGE).unwrap();
        assert_eq!(k.branch, Branch::Propagating);
        assert!(close(k.k.re, PI / 2.0, 1e-15));

        let k = wavevector_from_energy(-1.0, 0.0, 1.0, DEFAULT_EPS_EDGE).unwrap();
        assert_eq!(k.branch, Branch::Propagating);
        assert!(close(k.k.re, PI / 3.0, 1e-15));
    }

    #[test]
    fn evanescent_wavevector_decays_and_solves_lattice_equation() {
        let (energy, omega, xi) = (3.0, 0.0, 1.0);
        let wv = wavevector_from_energy(energy, omega, xi, DEFAULT_EPS_EDGE).unwrap();
        assert_eq!(wv.branch, Branch::Evanescent);
        assert_eq!(wv.k.re, PI);
        assert!(close(wv.k.im.cosh(), 1.5, 1e-14));

        // (E - omega) psi(j) = -xi [psi(j+1) + psi(j-1)] with psi(j) = exp(i k j)
        let psi = |j: f64| (Complex64::i() * wv.k * j).exp();
        for j in 1..8 {
            let j = j as f64;
            let lhs = (energy - omega) * psi(j);
            let rhs = -xi * (psi(j + 1.0) + psi(j - 1.0));
            assert!((lhs - rhs).norm() < 1e-12 * psi(j).norm().max(1e-300));
            assert!(psi(j + 1.0).norm() < psi(j).norm());
        }
        assert!((wv.bloch_factor() - (Complex64::i() * wv.k).exp()).norm() < 1e-15);
    }

    #[test]
    fn band_edges_are_rejected() {
        for e in [-2.0, 2.0, 2.0 - 1e-12] {
            assert!(matches!(
                wavevector_from_energy(e, 0.0, 1.0, DEFAULT_EPS_EDGE),
                Err(Error::BandEdge { .. })
            ));
        }
        assert!(wavevector_from_energy(2.0 - 1e-6, 0.0, 1.0, DEFAULT_EPS_EDGE).is_ok());
    }

    #[test]
    fn potential_examples() {
        let cfg = RouterConfig::default()
            .with_rabi(0.2)
            .with_levels(0.3, -0.1);
        assert_eq!(potential(-0.1, &cfg), PoleValue::Finite(0.0));

        let cfg = RouterConfig::default();
        assert_eq!(potential(0.5, &cfg), PoleValue::Finite(2.0));

        let cfg = RouterConfig::default().with_rabi(0.2);
        assert_eq!(potential(0.2, &cfg), PoleValue::Pole);
    }

    #[test]
    fn undriven_potential_has_no_pole_at_third_level() {
        let cfg = RouterConfig::default().with_levels(0.0, -0.6);
        assert_eq!(potential(-0.6, &cfg), PoleValue::Finite(1.0 / -0.6));
        assert_eq!(potential(0.0, &cfg), PoleValue::Pole);
    }

    #[test]
    fn pole_examples() {
        let cfg = RouterConfig::default().with_rabi(0.2);
        assert_eq!(poles(&cfg), (0.2, -0.2));

        let cfg = RouterConfig::default();
        assert_eq!(poles(&cfg), (0.0, 0.0));
        assert_eq!(active_poles(&cfg), vec![0.0]);

        let cfg = RouterConfig::default()
            .with_levels(0.0, -0.6)
            .with_rabi(0.2);
        let (hi, lo) = poles(&cfg);
        let d = (0.36f64 + 0.16).sqrt();
        assert!(close(hi, (-0.6 + d) / 2.0, 1e-15));
        assert!(close(lo, (-0.6 - d) / 2.0, 1e-15));
        assert!(close(hi, 0.06055, 1e-5) && close(lo, -0.66055, 1e-5));
    }

    #[test]
    fn drive_frequency_shifts_third_level_only_when_enabled() {
        let mut cfg = RouterConfig::default().with_rabi(0.2);
        cfg.nu = 0.4;
        assert_eq!(poles(&cfg), (0.2, -0.2));
        cfg.apply_nu = true;
        assert_eq!(cfg.omega_s_effective(), 0.4);
        let (hi, lo) = poles(&cfg);
        assert!(close(hi + lo, 0.4, 1e-15));
    }

    #[test]
    fn effective_site_energy_examples() {
        let cfg = RouterConfig::default()
            .with_rabi(0.3)
            .with_levels(0.1, -0.4);
        assert_eq!(
            effective_site_energy(-0.4, &cfg).unwrap(),
            PoleValue::Finite(0.0)
        );

        let cfg = RouterConfig::default().with_coupling(0.0);
        assert_eq!(
            effective_site_energy(0.0, &cfg).unwrap(),
            PoleValue::Finite(0.0)
        );
        assert_eq!(
            effective_site_energy(0.7, &cfg).unwrap(),
            PoleValue::Finite(0.0)
        );

        let cfg = RouterConfig::default();
        assert_eq!(
            effective_site_energy(0.5, &cfg).unwrap(),
            PoleValue::Finite(1.0)
        );
        assert_eq!(effective_site_energy(0.0, &cfg).unwrap(), PoleValue::Pole);

        let cfg = RouterConfig {
            g_b: 0.3,
            ..RouterConfig::default()
        };
        assert!(matches!(
            effective_site_energy(0.5, &cfg),
            Err(Error::ClosedFormUnavailable(_))
        ));
    }

    #[test]
    fn validation_names_violated_constraint() {
        let cfg = RouterConfig::default().with_n_atoms(0);
        assert_eq!(
            cfg.validate(),
            Err(Error::InvalidParameter("n_atoms ≥ 1".into()))
        );
        let cfg = RouterConfig {
            xi_b: 0.0,
            ..RouterConfig::default()
        };
        assert_eq!(
            cfg.validate(),
            Err(Error::InvalidParameter("xi_b > 0".into()))
        );
    }

    #[test]
    fn poles_match_sign_changes_of_the_denominator() {
        let cfg = RouterConfig::default()
            .with_levels(0.3, -0.5)
            .with_rabi(0.4);
        let (hi, lo) = poles(&cfg);
        assert!(potential(hi, &cfg).is_pole());
        assert!(potential(lo, &cfg).is_pole());
        let denom = |e: f64| (e - cfg.omega_s) * (e - cfg.omega_e) - cfg.rabi * cfg.rabi;
        let grid: Vec<f64> = (0..=4000).map(|i| -2.0 + 4.0 * i as f64 / 4000.0).collect();
        let mut crossings = Vec::new();
        for w in grid.windows(2) {
            assert!(!potential(w[0], &cfg).is_pole());
            if denom(w[0]).signum() != denom(w[1]).signum() {
                crossings.push((w[0], w[1]));
            }
        }
        assert_eq!(crossings.len(), 2);
        assert!(crossings[0].0 < lo && lo < crossings[0].1);
        assert!(crossings[1].0 < hi && hi < crossings[1].1);
        // V changes sign across each pole
        for p in [lo, hi] {
            let left = potential(p - 1e-6, &cfg).finite().unwrap();
            let right = potential(p + 1e-6, &cfg).finite().unwrap();
            assert!(left * right < 0.0);
        }
    }

    proptest! {
        #[test]
        fn dispersion_round_trip(k in 1e-3f64..(PI - 1e-3), omega in -1.0f64..1.0, xi in 0.2f64..3.0) {
            let e = dispersion_energy(k, omega, xi);
            let wv = wavevector_from_energy(e, omega, xi, DEFAULT_EPS_EDGE).unwrap();
            prop_assert_eq!(wv.branch, Branch::Propagating);
            prop_assert!((wv.k.re - k).abs() < 1e-12 * (1.0 / k.sin()).max(1.0));
            prop_assert!((dispersion_energy(wv.k.re, omega, xi) - e).abs() < 1e-12);
        }

        #[test]
        fn pole_splitting_bounds(we in -1.0f64..1.0, ws in -1.0f64..1.0, rabi in 0.0f64..1.5) {
            let cfg = RouterConfig::default().with_levels(we, ws).with_rabi(rabi);
            let (hi, lo) = poles(&cfg);
            prop_assert!(hi >= lo);
            prop_assert!(hi - lo >= 2.0 * rabi - 1e-15);
            if rabi > 0.0 {
                prop_assert!(potential(hi, &cfg).is_pole());
                prop_assert!(potential(lo, &cfg).is_pole());
            }
        }

        #[test]
        fn potential_is_finite_away_from_poles(e in -2.0f64..2.0, we in -1.0f64..1.0, ws in -1.0f64..1.0, rabi in 0.01f64..1.5) {
            let cfg = RouterConfig::default().with_levels(we, ws).with_rabi(rabi);
            let (hi, lo) = poles(&cfg);
            prop_assume!((e - hi).abs() > 1e-6 && (e - lo).abs() > 1e-6);
            let v = potential(e, &cfg).finite().unwrap();
            prop_assert!(v.is_finite());
        }
    }

    #[test]
    fn splitting_equals_twice_rabi_only_at_resonance() {
        let cfg = RouterConfig::default().with_rabi(0.35);
        let (hi, lo) = poles(&cfg);
        assert!(close(hi - lo, 0.7, 1e-15));
        let cfg = cfg.with_levels(0.0, 0.1);
        let (hi, lo) = poles(&cfg);
        assert!(hi - lo > 0.7);
    }
}
