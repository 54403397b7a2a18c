//! Closed-form scattering for the equal-parameter device.
//!
//! With identical waveguides and couplings the amplitudes `psi± = alpha ± beta`
//! decouple. The antisymmetric channel is a free chain (`r- = 0`, `t- = 1`);
//! the symmetric channel sees the energy-dependent site energy `eps+(E)` on
//! the `N` atom sites and is solved exactly as a finite barrier.
//!
//! The symmetric-channel amplitudes are written in terms of the Bloch factor
//! `z = exp(i k+)` of the region (`|z| <= 1`) and the geometric sum
//! `S = sum_{m<N} z^{2m}`:
//!
//! ```text
//! D  = sin k (1 + z^{2N}) + 2 i z (cos k cos k+ - 1) S
//! t+ = 2 exp(-i k N) sin k z^N / D
//! r+ = 2 i exp(i k) z (cos k - cos k+) S / D
//! ```
//!
//! This is the usual trigonometric result with numerator and denominator
//! multiplied by `z^N / sin k+`. It stays finite on transmission resonances
//! (`sin N k+ = 0`), at the region band edges (`sin k+ = 0`) and deep in the
//! evanescent regime where `cosh N kappa+` would overflow.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{
    effective_site_energy, wavevector_from_energy, Branch, PoleValue, RouterConfig, WaveVector,
};

/// Amplitudes in the virtual symmetric (`+`) and antisymmetric (`-`) channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelAmplitudes {
    pub r_plus: Complex64,
    pub t_plus: Complex64,
    pub r_minus: Complex64,
    pub t_minus: Complex64,
}

impl ChannelAmplitudes {
    pub fn symmetric(r_plus: Complex64, t_plus: Complex64) -> Self {
        Self {
            r_plus,
            t_plus,
            r_minus: Complex64::new(0.0, 0.0),
            t_minus: Complex64::new(1.0, 0.0),
        }
    }
}

/// Physical amplitudes for a photon incident from the left in waveguide `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringAmplitudes {
    pub r_a: Complex64,
    pub t_a: Complex64,
    pub t_b_back: Complex64,
    pub t_b_fwd: Complex64,
}

/// Outgoing probabilities: reflection, transmission, backward and forward
/// transfer into waveguide `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringProbabilities {
    pub r_a: f64,
    pub t_a: f64,
    pub t_b_back: f64,
    pub t_b_fwd: f64,
}

impl ScatteringProbabilities {
    pub fn sum(&self) -> f64 {
        self.r_a + self.t_a + self.t_b_back + self.t_b_fwd
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.r_a, self.t_a, self.t_b_back, self.t_b_fwd]
    }

    /// Largest deviation of any channel from the equal four-way split.
    pub fn max_quarter_deviation(&self) -> f64 {
        self.as_array()
            .iter()
            .map(|p| (p - 0.25).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Symmetric-channel solution together with the region wavevector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricChannel {
    pub amplitudes: ChannelAmplitudes,
    /// Lead wavevector `k`.
    pub k: WaveVector,
    /// Region wavevector `k+`; `None` when `eps+` sits on a pole.
    pub k_plus: Option<WaveVector>,
}

impl SymmetricChannel {
    pub fn character(&self) -> Branch {
        self.k_plus.map_or(Branch::Evanescent, |k| k.branch)
    }
}

/// Bloch factor `exp(i k+)` with `|z| <= 1` for a region with `cos k+ = c`.
///
/// Uses the larger root of `z + 1/z = 2c` and inverts it, which avoids the
/// cancellation in `c - sqrt(c^2 - 1)` for large `|c|`.
fn region_bloch_factor(cos_kp: f64) -> Complex64 {
    if cos_kp.abs() <= 1.0 {
        return Complex64::new(cos_kp, (1.0 - cos_kp * cos_kp).max(0.0).sqrt());
    }
    let a = cos_kp.abs();
    let root = if a > 1e150 {
        a
    } else {
        (a - 1.0).sqrt() * (a + 1.0).sqrt()
    };
    let big = (a + root).copysign(cos_kp);
    Complex64::new(1.0 / big, 0.0)
}

/// Full symmetric-channel solution at energy `E`.
pub fn symmetric_channel(energy: f64, cfg: &RouterConfig) -> Result<SymmetricChannel> {
    cfg.require_symmetric()?;
    let (omega0, xi, n) = (cfg.omega_a, cfg.xi_a, cfg.n_atoms);
    let (lo, hi) = cfg.band_a();
    let k = wavevector_from_energy(energy, omega0, xi, cfg.tolerances.eps_edge)?;
    if k.branch != Branch::Propagating {
        return Err(Error::OutsideBand { energy, lo, hi });
    }
    let kr = k.k.re;
    let (sin_k, cos_k) = kr.sin_cos();
    let e_ik = Complex64::new(cos_k, sin_k);

    let eps_plus = match effective_site_energy(energy, cfg)? {
        PoleValue::Finite(v) => v,
        PoleValue::Pole => {
            // exp(-kappa+ N) -> 0: the symmetric channel is fully reflecting.
            return Ok(SymmetricChannel {
                amplitudes: ChannelAmplitudes::symmetric(-e_ik * e_ik, Complex64::new(0.0, 0.0)),
                k,
                k_plus: None,
            });
        }
    };

    let cos_kp = (eps_plus - energy) / (2.0 * xi);
    let z = region_bloch_factor(cos_kp);
    let q = z * z;
    let mut geometric = Complex64::new(0.0, 0.0);
    let mut q_pow = Complex64::new(1.0, 0.0);
    for _ in 0..n {
        geometric += q_pow;
        q_pow *= q;
    }
    // q_pow == q^N, z_n == z^N
    let z_n = z.powu(n as u32);
    let i = Complex64::i();
    let denom = sin_k * (1.0 + q_pow) + 2.0 * i * z * (cos_k * cos_kp - 1.0) * geometric;
    let phase_back = Complex64::from_polar(1.0, -kr * n as f64);
    let t_plus = 2.0 * sin_k * phase_back * z_n / denom;
    let r_plus = 2.0 * i * e_ik * z * (cos_k - cos_kp) * geometric / denom;

    Ok(SymmetricChannel {
        amplitudes: ChannelAmplitudes::symmetric(r_plus, t_plus),
        k,
        k_plus: Some(WaveVector::from_cos(cos_kp)),
    })
}

/// Reflection and transmission in the virtual symmetric/antisymmetric channels.
pub fn sa_amplitudes(energy: f64, cfg: &RouterConfig) -> Result<ChannelAmplitudes> {
    symmetric_channel(energy, cfg).map(|s| s.amplitudes)
}

/// Recombines the virtual channels into amplitudes of the physical waveguides.
pub fn physical_amplitudes(ch: &ChannelAmplitudes) -> ScatteringAmplitudes {
    let half = 0.5;
    ScatteringAmplitudes {
        r_a: half * (ch.r_plus + ch.r_minus),
        t_a: half * (ch.t_plus + ch.t_minus),
        t_b_back: half * (ch.r_plus - ch.r_minus),
        t_b_fwd: half * (ch.t_plus - ch.t_minus),
    }
}

/// Squared magnitudes. Valid as flux ratios when both waveguides share the
/// same dispersion.
pub fn probabilities(amp: &ScatteringAmplitudes) -> ScatteringProbabilities {
    ScatteringProbabilities {
        r_a: amp.r_a.norm_sqr(),
        t_a: amp.t_a.norm_sqr(),
        t_b_back: amp.t_b_back.norm_sqr(),
        t_b_fwd: amp.t_b_fwd.norm_sqr(),
    }
}

pub fn scatter(energy: f64, cfg: &RouterConfig) -> Result<ScatteringProbabilities> {
    let ch = sa_amplitudes(energy, cfg)?;
    Ok(probabilities(&physical_amplitudes(&ch)))
}
