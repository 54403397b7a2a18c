//! Direct solution of the stationary scattering problem.
//!
//! The amplitudes on the `N` coupled sites of both waveguides and the atomic
//! amplitudes are assembled together with the plane-wave boundary conditions
//! into one dense linear system of size `4N + 4` and solved by elimination.
//! Nothing here relies on the symmetric/antisymmetric decomposition, so the
//! solver covers unequal waveguides and couplings as well and serves as an
//! independent check on [`crate::closed_form`].

pub mod dense;

use num_complex::Complex64;

use crate::closed_form::{ScatteringAmplitudes, ScatteringProbabilities};
use crate::error::{Error, Result};
use crate::model::{
    effective_site_energy, wavevector_from_energy, Branch, PoleValue, RouterConfig, WaveVector,
};
use dense::DenseMatrix;

/// Pivots below this fraction of the largest matrix entry are reported as singular.
pub const PIVOT_TOL: f64 = 1e-14;

/// Column index of every unknown. Sites are 1-based.
#[derive(Debug, Clone, Copy)]
struct Layout {
    n: usize,
}

impl Layout {
    fn alpha(self, j: usize) -> usize {
        j - 1
    }
    fn beta(self, j: usize) -> usize {
        self.n + j - 1
    }
    fn excited(self, j: usize) -> usize {
        2 * self.n + j - 1
    }
    fn third(self, j: usize) -> usize {
        3 * self.n + j - 1
    }
    fn interior(self) -> usize {
        4 * self.n
    }
    fn r_a(self) -> usize {
        4 * self.n
    }
    /// `t_a exp(i k_a (N+1))`, the amplitude on the first site right of the region.
    fn right_a(self) -> usize {
        4 * self.n + 1
    }
    fn t_b_back(self) -> usize {
        4 * self.n + 2
    }
    /// `t_b_fwd exp(i k_b (N+1))`.
    fn right_b(self) -> usize {
        4 * self.n + 3
    }
    fn dim(self) -> usize {
        4 * self.n + 4
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    /// Waveguide `a` amplitudes on sites `0..=N+1`.
    pub alpha: Vec<Complex64>,
    /// Waveguide `b` amplitudes on sites `0..=N+1`.
    pub beta: Vec<Complex64>,
    /// Excited-state amplitude of atoms `1..=N`.
    pub u_e: Vec<Complex64>,
    /// Third-level amplitude of atoms `1..=N`.
    pub u_s: Vec<Complex64>,
    pub amps: ScatteringAmplitudes,
    pub k_a: WaveVector,
    pub k_b: WaveVector,
    /// `max |A x - b|` of the solved system.
    pub residual: f64,
    /// Largest entry magnitude of the system matrix.
    pub system_norm: f64,
}

impl OracleSolution {
    /// Flux-normalized outgoing probabilities. Outgoing amplitudes in
    /// waveguide `b` are weighted by `v_b / v_a` with `v = 2 xi sin k`;
    /// an evanescent waveguide `b` carries no flux.
    pub fn probabilities(&self, cfg: &RouterConfig) -> ScatteringProbabilities {
        let v_a = self.k_a.group_velocity(cfg.xi_a);
        let v_b = self.k_b.group_velocity(cfg.xi_b);
        let weight_b = v_b / v_a;
        ScatteringProbabilities {
            r_a: self.amps.r_a.norm_sqr(),
            t_a: self.amps.t_a.norm_sqr(),
            t_b_back: weight_b * self.amps.t_b_back.norm_sqr(),
            t_b_fwd: weight_b * self.amps.t_b_fwd.norm_sqr(),
        }
    }
}

/// Energy-independent part `H` of the interior rows, ordered as
/// `[alpha(1..N), beta(1..N), u_e(1..N), u_s(1..N)]`. The interior block of
/// the scattering system is `E - H`.
pub fn interior_hamiltonian(cfg: &RouterConfig) -> DenseMatrix {
    let n = cfg.n_atoms;
    let lay = Layout { n };
    let mut h = DenseMatrix::zeros(lay.interior());
    let re = |x: f64| Complex64::new(x, 0.0);
    let rabi = re(cfg.rabi);
    for j in 1..=n {
        h.set(lay.alpha(j), lay.alpha(j), re(cfg.omega_a));
        h.set(lay.beta(j), lay.beta(j), re(cfg.omega_b));
        h.set(lay.excited(j), lay.excited(j), re(cfg.omega_e));
        h.set(lay.third(j), lay.third(j), re(cfg.omega_s_effective()));
        if j < n {
            for (site, xi) in [
                (Layout::alpha as fn(Layout, usize) -> usize, cfg.xi_a),
                (Layout::beta, cfg.xi_b),
            ] {
                h.set(site(lay, j), site(lay, j + 1), re(-xi));
                h.set(site(lay, j + 1), site(lay, j), re(-xi));
            }
        }
        h.set(lay.alpha(j), lay.excited(j), re(cfg.g_a));
        h.set(lay.excited(j), lay.alpha(j), re(cfg.g_a));
        h.set(lay.beta(j), lay.excited(j), re(cfg.g_b));
        h.set(lay.excited(j), lay.beta(j), re(cfg.g_b));
        h.set(lay.excited(j), lay.third(j), rabi);
        h.set(lay.third(j), lay.excited(j), rabi.conj());
    }
    h
}

struct System {
    matrix: DenseMatrix,
    rhs: Vec<Complex64>,
    k_a: WaveVector,
    k_b: WaveVector,
}

fn assemble(energy: f64, cfg: &RouterConfig) -> Result<System> {
    cfg.validate()?;
    let n = cfg.n_atoms;
    let lay = Layout { n };
    let (lo, hi) = cfg.band_a();
    let k_a = wavevector_from_energy(energy, cfg.omega_a, cfg.xi_a, cfg.tolerances.eps_edge)?;
    if k_a.branch != Branch::Propagating {
        return Err(Error::OutsideBand { energy, lo, hi });
    }
    let k_b = wavevector_from_energy(energy, cfg.omega_b, cfg.xi_b, cfg.tolerances.eps_edge)?;
    let (za, zb) = (k_a.bloch_factor(), k_b.bloch_factor());
    let e = Complex64::new(energy, 0.0);
    let (xa, xb) = (Complex64::new(cfg.xi_a, 0.0), Complex64::new(cfg.xi_b, 0.0));

    let h = interior_hamiltonian(cfg);
    let mut a = DenseMatrix::zeros(lay.dim());
    let mut rhs = vec![Complex64::new(0.0, 0.0); lay.dim()];
    for r in 0..lay.interior() {
        for c in 0..lay.interior() {
            let diag = if r == c { e } else { Complex64::new(0.0, 0.0) };
            a.set(r, c, diag - h.get(r, c));
        }
    }

    // Without drive the third level is decoupled; at E = omega_s its row
    // vanishes. A photon cannot populate it, so pin u_s = 0.
    if cfg.rabi == 0.0 {
        for j in 1..=n {
            a.set(lay.third(j), lay.third(j), Complex64::new(1.0, 0.0));
        }
    }

    // Ghost sites outside the region enter the first and last interior rows:
    // alpha(0) = 1 + r_a, alpha(N+1) = right_a, beta(0) = t_b_back, beta(N+1) = right_b.
    a.add(lay.alpha(1), lay.r_a(), xa);
    rhs[lay.alpha(1)] -= xa;
    a.add(lay.alpha(n), lay.right_a(), xa);
    a.add(lay.beta(1), lay.t_b_back(), xb);
    a.add(lay.beta(n), lay.right_b(), xb);

    // Lattice equations on the ghost sites close the system, with
    // alpha(-1) = exp(-i k_a) + r_a exp(i k_a), alpha(N+2) = right_a exp(i k_a),
    // beta(-1) = t_b_back exp(i k_b), beta(N+2) = right_b exp(i k_b).
    let da = e - cfg.omega_a;
    let db = e - cfg.omega_b;

    let row = lay.r_a();
    a.set(row, lay.r_a(), da + xa * za);
    a.set(row, lay.alpha(1), xa);
    rhs[row] = -da - xa * za.inv();

    let row = lay.right_a();
    a.set(row, lay.right_a(), da + xa * za);
    a.set(row, lay.alpha(n), xa);

    let row = lay.t_b_back();
    a.set(row, lay.t_b_back(), db + xb * zb);
    a.set(row, lay.beta(1), xb);

    let row = lay.right_b();
    a.set(row, lay.right_b(), db + xb * zb);
    a.set(row, lay.beta(n), xb);

    Ok(System {
        matrix: a,
        rhs,
        k_a,
        k_b,
    })
}

/// Solves the scattering problem for a photon incident from the left in
/// waveguide `a` at energy `E`.
pub fn oracle_solve(energy: f64, cfg: &RouterConfig) -> Result<OracleSolution> {
    let System {
        matrix,
        rhs,
        k_a,
        k_b,
    } = assemble(energy, cfg)?;
    let n = cfg.n_atoms;
    let lay = Layout { n };
    let x = dense::solve(&matrix, &rhs, PIVOT_TOL).map_err(|p| Error::SingularSystem {
        energy,
        column: p.column,
        pivot: p.pivot,
    })?;
    let residual = matrix
        .mul_vec(&x)
        .iter()
        .zip(&rhs)
        .map(|(l, r)| (l - r).norm())
        .fold(0.0, f64::max);

    let r_a = x[lay.r_a()];
    let t_b_back = x[lay.t_b_back()];
    let right_a = x[lay.right_a()];
    let right_b = x[lay.right_b()];
    let shift = (n + 1) as f64;
    let t_a = right_a * (-Complex64::i() * k_a.k * shift).exp();
    let t_b_fwd = right_b * (-Complex64::i() * k_b.k * shift).exp();

    let mut alpha = Vec::with_capacity(n + 2);
    alpha.push(1.0 + r_a);
    alpha.extend((1..=n).map(|j| x[lay.alpha(j)]));
    alpha.push(right_a);
    let mut beta = Vec::with_capacity(n + 2);
    beta.push(t_b_back);
    beta.extend((1..=n).map(|j| x[lay.beta(j)]));
    beta.push(right_b);

    Ok(OracleSolution {
        alpha,
        beta,
        u_e: (1..=n).map(|j| x[lay.excited(j)]).collect(),
        u_s: (1..=n).map(|j| x[lay.third(j)]).collect(),
        amps: ScatteringAmplitudes {
            r_a,
            t_a,
            t_b_back,
            t_b_fwd,
        },
        k_a,
        k_b,
        residual,
        system_norm: matrix.max_norm(),
    })
}

/// Flux-normalized probabilities from the direct solver.
pub fn oracle_scatter(energy: f64, cfg: &RouterConfig) -> Result<ScatteringProbabilities> {
    oracle_solve(energy, cfg).map(|s| s.probabilities(cfg))
}

/// Checks the symmetric/antisymmetric decoupling on a direct solution.
///
/// Returns `(antisymmetric deviation, symmetric residual)`: the largest
/// deviation of `psi- = alpha - beta` from the free wave `exp(i k j)` or
/// from the free lattice equation, and the largest residual of `psi+ =
/// alpha + beta` in the lattice equation with site energy `eps+(E)` on the
/// atom sites. On a pole of `eps+` the symmetric residual is `max |psi+(j)|`
/// over the region, which must vanish there.
pub fn oracle_sa_check(energy: f64, cfg: &RouterConfig) -> Result<(f64, f64)> {
    cfg.require_symmetric()?;
    let sol = oracle_solve(energy, cfg)?;
    let n = cfg.n_atoms;
    let (omega0, xi) = (cfg.omega_a, cfg.xi_a);
    let plus: Vec<Complex64> = sol
        .alpha
        .iter()
        .zip(&sol.beta)
        .map(|(a, b)| a + b)
        .collect();
    let minus: Vec<Complex64> = sol
        .alpha
        .iter()
        .zip(&sol.beta)
        .map(|(a, b)| a - b)
        .collect();

    let lattice = |psi: &[Complex64], site_energy: f64, j: usize| {
        ((energy - site_energy) * psi[j] + xi * (psi[j + 1] + psi[j - 1])).norm()
    };

    let mut minus_dev = 0.0f64;
    for (j, psi) in minus.iter().enumerate() {
        let free = (Complex64::i() * sol.k_a.k * j as f64).exp();
        minus_dev = minus_dev.max((psi - free).norm());
    }
    for j in 1..=n {
        minus_dev = minus_dev.max(lattice(&minus, omega0, j));
    }

    let mut plus_res = 0.0f64;
    match effective_site_energy(energy, cfg)? {
        PoleValue::Finite(eps_plus) => {
            for j in 1..=n {
                plus_res = plus_res.max(lattice(&plus, eps_plus, j));
            }
        }
        PoleValue::Pole => {
            for psi in &plus[1..=n] {
                plus_res = plus_res.max(psi.norm());
            }
        }
    }
    Ok((minus_dev, plus_res))
}
