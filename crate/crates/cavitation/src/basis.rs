//! Chebyshev and Fourier primitives: polynomial evaluation, quadrature
//! rules, truncated Fourier-Chebyshev series with first derivatives, and
//! grid interpolation.
//!
//! A field on the computational annulus `(-1,1) x (0,2pi)` is expanded as
//!
//! ```text
//! P(rho, phi) = sum_{j=0}^{M} ( sum_{k=0}^{N/2}   alpha[k][j] cos(k phi)
//!                             + sum_{k=1}^{N/2-1} beta[k][j]  sin(k phi) ) T_j(rho)
//! ```
//!
//! with `T_j` the Chebyshev polynomial of the first kind. The `Q` component
//! uses coefficients `xi` (cosine) and `eta` (sine) with the same index
//! ranges. `N` is even; the Nyquist cosine mode `k = N/2` carries no sine
//! partner.
//!
//! Two distinct radial grids appear:
//! - quadrature uses Chebyshev-Gauss interior points `cos((2m'+1)pi/(2M'+2))`,
//! - interpolation uses the Chebyshev extrema `cos(m pi / M)`.
//!
//! They must not be conflated.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the `|rho| <= 1` domain check of evaluation routines.
const RHO_DOMAIN_TOL: f64 = 1e-12;

/// Evaluate the Chebyshev polynomial of the first kind `T_j(x)` by the
/// three-term recurrence `T_{j+1} = 2x T_j - T_{j-1}`.
pub fn chebyshev_eval(j: usize, x: f64) -> Result<f64> {
    check_rho(x)?;
    Ok(chebyshev_t_unchecked(j, x))
}

/// Evaluate the derivative `T_j'(x)` via `T_j' = j U_{j-1}` with the
/// second-kind recurrence for `U`.
pub fn chebyshev_eval_prime(j: usize, x: f64) -> Result<f64> {
    check_rho(x)?;
    Ok(chebyshev_t_prime_unchecked(j, x))
}

fn check_rho(x: f64) -> Result<()> {
    if !(x.abs() <= 1.0 + RHO_DOMAIN_TOL) {
        return Err(Error::OutOfDomain {
            what: "rho",
            value: x,
        });
    }
    Ok(())
}

fn chebyshev_t_unchecked(j: usize, x: f64) -> f64 {
    match j {
        0 => 1.0,
        1 => x,
        _ => {
            let mut prev = 1.0;
            let mut cur = x;
            for _ in 1..j {
                let next = 2.0 * x * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

fn chebyshev_t_prime_unchecked(j: usize, x: f64) -> f64 {
    if j == 0 {
        return 0.0;
    }
    // U_{j-1} by its own recurrence.
    let mut prev = 1.0; // U_0
    let mut cur = 2.0 * x; // U_1
    let u = match j - 1 {
        0 => prev,
        1 => cur,
        deg => {
            for _ in 1..deg {
                let next = 2.0 * x * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    };
    j as f64 * u
}

/// Fill `values[j] = T_j(x)` and `derivs[j] = T_j'(x)` for `j = 0..len`.
fn chebyshev_row(x: f64, values: &mut [f64], derivs: &mut [f64]) {
    let len = values.len();
    debug_assert_eq!(len, derivs.len());
    if len == 0 {
        return;
    }
    values[0] = 1.0;
    derivs[0] = 0.0;
    if len == 1 {
        return;
    }
    values[1] = x;
    derivs[1] = 1.0;
    for j in 2..len {
        values[j] = 2.0 * x * values[j - 1] - values[j - 2];
        // T_j' = 2 T_{j-1} + 2 x T_{j-1}' - T_{j-2}'
        derivs[j] = 2.0 * values[j - 1] + 2.0 * x * derivs[j - 1] - derivs[j - 2];
    }
}

/// Gauss-Chebyshev nodes `cos((2m'+1)pi/(2M'+2))` and equal weights
/// `pi/(M'+1)` for `m' = 0..=M'`. Nodes are strictly decreasing. The rule
/// integrates `f(rho) (1-rho^2)^{-1/2}` exactly for polynomials `f` of
/// degree `<= 2M'+1`.
pub fn gauss_chebyshev_rule(m_prime: usize) -> (Vec<f64>, Vec<f64>) {
    let count = m_prime + 1;
    let weight = PI / count as f64;
    let nodes: Vec<f64> = (0..count)
        .map(|m| ((2 * m + 1) as f64 * PI / (2.0 * count as f64)).cos())
        .collect();
    (nodes, vec![weight; count])
}

/// Uniform Fourier nodes `2 pi n'/N'` and weights `2 pi / N'` for
/// `n' = 0..N'`. Exact for trigonometric polynomials of degree `< N'`.
pub fn fourier_rule(n_prime: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n_prime >= 1, "fourier rule needs at least one node");
    let weight = 2.0 * PI / n_prime as f64;
    let nodes: Vec<f64> = (0..n_prime)
        .map(|n| 2.0 * PI * n as f64 / n_prime as f64)
        .collect();
    (nodes, vec![weight; n_prime])
}

/// Tensor-product quadrature grid: Gauss-Chebyshev radially, uniform
/// Fourier nodes angularly.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub chebyshev_nodes: Vec<f64>,
    pub chebyshev_weights: Vec<f64>,
    pub fourier_nodes: Vec<f64>,
    pub fourier_weights: Vec<f64>,
}

impl QuadratureRule {
    /// Build the product rule with `n_prime` angular and `m_prime + 1`
    /// radial nodes.
    pub fn new(n_prime: usize, m_prime: usize) -> Self {
        let (chebyshev_nodes, chebyshev_weights) = gauss_chebyshev_rule(m_prime);
        let (fourier_nodes, fourier_weights) = fourier_rule(n_prime);
        QuadratureRule {
            chebyshev_nodes,
            chebyshev_weights,
            fourier_nodes,
            fourier_weights,
        }
    }

    pub fn radial_count(&self) -> usize {
        self.chebyshev_nodes.len()
    }

    pub fn angular_count(&self) -> usize {
        self.fourier_nodes.len()
    }
}

/// Pointwise field value and first partial derivatives.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FieldJet {
    pub p: f64,
    pub q: f64,
    pub p_rho: f64,
    pub p_phi: f64,
    pub q_rho: f64,
    pub q_phi: f64,
}

/// Coefficients of a truncated Fourier-Chebyshev pair `(P, Q)`.
///
/// Stored as dense blocks: `alpha`, `xi` have `N/2 + 1` rows (cosine modes
/// `k = 0..=N/2`), `beta`, `eta` have `N/2 - 1` rows (sine modes
/// `k = 1..=N/2-1`); all blocks have `M + 1` columns (Chebyshev degrees).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    n: usize,
    m: usize,
    pub alpha: DMatrix<f64>,
    pub beta: DMatrix<f64>,
    pub xi: DMatrix<f64>,
    pub eta: DMatrix<f64>,
}

impl SpectralField {
    /// All-zero field with circumferential truncation `n` (even, >= 2) and
    /// radial degree `m` (>= 1).
    pub fn zeros(n: usize, m: usize) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::InvalidConfig {
                field: "n",
                reason: format!("must be an even integer >= 2, got {n}"),
            });
        }
        if m < 1 {
            return Err(Error::InvalidConfig {
                field: "m",
                reason: format!("must be >= 1, got {m}"),
            });
        }
        let cos_rows = n / 2 + 1;
        let sin_rows = n / 2 - 1;
        Ok(SpectralField {
            n,
            m,
            alpha: DMatrix::zeros(cos_rows, m + 1),
            beta: DMatrix::zeros(sin_rows, m + 1),
            xi: DMatrix::zeros(cos_rows, m + 1),
            eta: DMatrix::zeros(sin_rows, m + 1),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of cosine rows (`N/2 + 1`).
    pub fn cos_rows(&self) -> usize {
        self.n / 2 + 1
    }

    /// Number of sine rows (`N/2 - 1`).
    pub fn sin_rows(&self) -> usize {
        self.n / 2 - 1
    }

    /// Evaluate `(P, Q)` and all four first partials at a point by direct
    /// summation of the truncated series.
    pub fn eval_field(&self, rho: f64, phi: f64) -> Result<FieldJet> {
        check_rho(rho)?;
        let mut t = vec![0.0; self.m + 1];
        let mut dt = vec![0.0; self.m + 1];
        chebyshev_row(rho, &mut t, &mut dt);

        let mut jet = FieldJet::default();
        for k in 0..=self.n / 2 {
            let (ck, sk) = ((k as f64 * phi).cos(), (k as f64 * phi).sin());
            let mut a_val = 0.0;
            let mut a_der = 0.0;
            for j in 0..=self.m {
                a_val += self.alpha[(k, j)] * t[j];
                a_der += self.alpha[(k, j)] * dt[j];
            }
            jet.p += a_val * ck;
            jet.p_rho += a_der * ck;
            jet.p_phi -= a_val * k as f64 * sk;

            let mut x_val = 0.0;
            let mut x_der = 0.0;
            for j in 0..=self.m {
                x_val += self.xi[(k, j)] * t[j];
                x_der += self.xi[(k, j)] * dt[j];
            }
            jet.q += x_val * ck;
            jet.q_rho += x_der * ck;
            jet.q_phi -= x_val * k as f64 * sk;
        }
        for row in 0..self.sin_rows() {
            let k = row + 1;
            let (ck, sk) = ((k as f64 * phi).cos(), (k as f64 * phi).sin());
            let mut b_val = 0.0;
            let mut b_der = 0.0;
            for j in 0..=self.m {
                b_val += self.beta[(row, j)] * t[j];
                b_der += self.beta[(row, j)] * dt[j];
            }
            jet.p += b_val * sk;
            jet.p_rho += b_der * sk;
            jet.p_phi += b_val * k as f64 * ck;

            let mut e_val = 0.0;
            let mut e_der = 0.0;
            for j in 0..=self.m {
                e_val += self.eta[(row, j)] * t[j];
                e_der += self.eta[(row, j)] * dt[j];
            }
            jet.q += e_val * sk;
            jet.q_rho += e_der * sk;
            jet.q_phi += e_val * k as f64 * ck;
        }
        Ok(jet)
    }

    /// Evaluate jets on a tensor grid of radial and angular nodes.
    ///
    /// Returns jets in radial-major order: entry `mi * phi_nodes.len() + ni`
    /// holds the jet at `(rho_nodes[mi], phi_nodes[ni])`. Uses a separated
    /// contraction (radial sums per mode, then angular synthesis); agrees
    /// with [`SpectralField::eval_field`] to roundoff.
    pub fn jets_on_grid(&self, rho_nodes: &[f64], phi_nodes: &[f64]) -> Vec<FieldJet> {
        let half = self.n / 2;
        let n_rad = rho_nodes.len();
        let n_ang = phi_nodes.len();

        // Radial contractions: per cosine/sine mode, value and derivative
        // of the Chebyshev sum at every radial node.
        let mut a_val = DMatrix::zeros(half + 1, n_rad);
        let mut a_der = DMatrix::zeros(half + 1, n_rad);
        let mut x_val = DMatrix::zeros(half + 1, n_rad);
        let mut x_der = DMatrix::zeros(half + 1, n_rad);
        let sin_rows = self.sin_rows();
        let mut b_val = DMatrix::zeros(sin_rows, n_rad);
        let mut b_der = DMatrix::zeros(sin_rows, n_rad);
        let mut e_val = DMatrix::zeros(sin_rows, n_rad);
        let mut e_der = DMatrix::zeros(sin_rows, n_rad);

        let mut t = vec![0.0; self.m + 1];
        let mut dt = vec![0.0; self.m + 1];
        for (mi, &rho) in rho_nodes.iter().enumerate() {
            chebyshev_row(rho, &mut t, &mut dt);
            for k in 0..=half {
                let (mut av, mut ad, mut xv, mut xd) = (0.0, 0.0, 0.0, 0.0);
                for j in 0..=self.m {
                    av += self.alpha[(k, j)] * t[j];
                    ad += self.alpha[(k, j)] * dt[j];
                    xv += self.xi[(k, j)] * t[j];
                    xd += self.xi[(k, j)] * dt[j];
                }
                a_val[(k, mi)] = av;
                a_der[(k, mi)] = ad;
                x_val[(k, mi)] = xv;
                x_der[(k, mi)] = xd;
            }
            for row in 0..sin_rows {
                let (mut bv, mut bd, mut ev, mut ed) = (0.0, 0.0, 0.0, 0.0);
                for j in 0..=self.m {
                    bv += self.beta[(row, j)] * t[j];
                    bd += self.beta[(row, j)] * dt[j];
                    ev += self.eta[(row, j)] * t[j];
                    ed += self.eta[(row, j)] * dt[j];
                }
                b_val[(row, mi)] = bv;
                b_der[(row, mi)] = bd;
                e_val[(row, mi)] = ev;
                e_der[(row, mi)] = ed;
            }
        }

        // Angular tables.
        let mut cos_tab = DMatrix::zeros(half + 1, n_ang);
        let mut sin_tab = DMatrix::zeros(half + 1, n_ang);
        for (ni, &phi) in phi_nodes.iter().enumerate() {
            for k in 0..=half {
                cos_tab[(k, ni)] = (k as f64 * phi).cos();
                sin_tab[(k, ni)] = (k as f64 * phi).sin();
            }
        }

        let mut jets = vec![FieldJet::default(); n_rad * n_ang];
        for mi in 0..n_rad {
            for ni in 0..n_ang {
                let mut jet = FieldJet::default();
                for k in 0..=half {
                    let kf = k as f64;
                    let (ck, sk) = (cos_tab[(k, ni)], sin_tab[(k, ni)]);
                    jet.p += a_val[(k, mi)] * ck;
                    jet.p_rho += a_der[(k, mi)] * ck;
                    jet.p_phi -= a_val[(k, mi)] * kf * sk;
                    jet.q += x_val[(k, mi)] * ck;
                    jet.q_rho += x_der[(k, mi)] * ck;
                    jet.q_phi -= x_val[(k, mi)] * kf * sk;
                }
                for row in 0..sin_rows {
                    let k = row + 1;
                    let kf = k as f64;
                    let (ck, sk) = (cos_tab[(k, ni)], sin_tab[(k, ni)]);
                    jet.p += b_val[(row, mi)] * sk;
                    jet.p_rho += b_der[(row, mi)] * sk;
                    jet.p_phi += b_val[(row, mi)] * kf * ck;
                    jet.q += e_val[(row, mi)] * sk;
                    jet.q_rho += e_der[(row, mi)] * sk;
                    jet.q_phi += e_val[(row, mi)] * kf * ck;
                }
                jets[mi * n_ang + ni] = jet;
            }
        }
        jets
    }

    /// Jets at every node of a quadrature rule, radial-major.
    pub fn eval_field_grid(&self, rule: &QuadratureRule) -> Vec<FieldJet> {
        self.jets_on_grid(&rule.chebyshev_nodes, &rule.fourier_nodes)
    }
}

/// Truncated real Fourier series `sum cos[k] cos(k phi) + sum sin_k sin(k phi)`.
///
/// `cos` has length `N/2 + 1`; `sin` has length `N/2 - 1` with entry `i`
/// belonging to wavenumber `k = i + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierSeries {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl FourierSeries {
    pub fn eval(&self, phi: f64) -> f64 {
        let mut v = 0.0;
        for (k, c) in self.cos.iter().enumerate() {
            v += c * (k as f64 * phi).cos();
        }
        for (i, s) in self.sin.iter().enumerate() {
            v += s * ((i + 1) as f64 * phi).sin();
        }
        v
    }
}

/// Discrete Fourier coefficients of `N` real samples at `phi_n = 2 pi n / N`
/// (`N` even). The returned series interpolates the samples exactly; the
/// Nyquist cosine mode is halved so resynthesis at the nodes is the
/// identity, and modes `k = 0, N/2` carry no sine partner.
pub fn real_dft(samples: &[f64]) -> Result<FourierSeries> {
    let n = samples.len();
    if n < 2 || n % 2 != 0 {
        return Err(Error::ShapeMismatch {
            what: "fourier samples",
            expected: "even count >= 2".into(),
            got: format!("{n}"),
        });
    }
    let half = n / 2;
    let mut cos = vec![0.0; half + 1];
    let mut sin = vec![0.0; half.saturating_sub(1)];
    for k in 0..=half {
        let mut acc = 0.0;
        for (i, &v) in samples.iter().enumerate() {
            acc += v * (k as f64 * 2.0 * PI * i as f64 / n as f64).cos();
        }
        let scale = if k == 0 || k == half { 1.0 } else { 2.0 };
        cos[k] = scale * acc / n as f64;
    }
    for k in 1..half {
        let mut acc = 0.0;
        for (i, &v) in samples.iter().enumerate() {
            acc += v * (k as f64 * 2.0 * PI * i as f64 / n as f64).sin();
        }
        sin[k - 1] = 2.0 * acc / n as f64;
    }
    Ok(FourierSeries { cos, sin })
}

/// Discrete Fourier coefficients of boundary traces `P_0(1, phi_n)` and
/// `Q_0(1, phi_n)`: returns `({a_k, b_k}, {c_k, d_k})`.
pub fn boundary_fourier_coeffs(
    p0_samples: &[f64],
    q0_samples: &[f64],
) -> Result<(FourierSeries, FourierSeries)> {
    if p0_samples.len() != q0_samples.len() {
        return Err(Error::ShapeMismatch {
            what: "boundary samples",
            expected: format!("{}", p0_samples.len()),
            got: format!("{}", q0_samples.len()),
        });
    }
    Ok((real_dft(p0_samples)?, real_dft(q0_samples)?))
}

/// Chebyshev coefficients of `M + 1` values on the extrema grid
/// `rho_m = cos(m pi / M)` (a DCT-I with endpoint halving).
pub fn chebyshev_coeffs_extrema(values: &[f64]) -> Result<Vec<f64>> {
    let m = values.len().saturating_sub(1);
    if m < 1 {
        return Err(Error::ShapeMismatch {
            what: "chebyshev samples",
            expected: "at least 2 values".into(),
            got: format!("{}", values.len()),
        });
    }
    let mut coeffs = vec![0.0; m + 1];
    for (j, c) in coeffs.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (i, &v) in values.iter().enumerate() {
            let sigma = if i == 0 || i == m { 0.5 } else { 1.0 };
            acc += sigma * v * (j as f64 * i as f64 * PI / m as f64).cos();
        }
        let gamma = if j == 0 || j == m { 2.0 } else { 1.0 };
        *c = 2.0 * acc / (gamma * m as f64);
    }
    Ok(coeffs)
}

/// Radial extrema nodes `rho_m = cos(m pi / M)`, `m = 0..=M` (decreasing
/// from `+1` to `-1`).
pub fn extrema_nodes(m: usize) -> Vec<f64> {
    (0..=m)
        .map(|i| (i as f64 * PI / m as f64).cos())
        .collect()
}

/// Angular interpolation nodes `phi_n = 2 pi n / N`, `n = 0..N`.
pub fn angular_nodes(n: usize) -> Vec<f64> {
    (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect()
}

/// Interpolation operator: build the truncated field matching `P`, `Q`
/// samples on the tensor grid `(rho_m, phi_n)` with `rho_m = cos(m pi / M)`
/// and `phi_n = 2 pi n / N`.
///
/// `p_samples` and `q_samples` are `(M+1) x N` matrices; row `m` holds the
/// samples at `rho_m` over the angular nodes.
pub fn interpolate(
    p_samples: &DMatrix<f64>,
    q_samples: &DMatrix<f64>,
    n: usize,
    m: usize,
) -> Result<SpectralField> {
    let expected = (m + 1, n);
    for (name, s) in [("p_samples", p_samples), ("q_samples", q_samples)] {
        if s.shape() != expected {
            return Err(Error::ShapeMismatch {
                what: name,
                expected: format!("{}x{}", expected.0, expected.1),
                got: format!("{}x{}", s.shape().0, s.shape().1),
            });
        }
    }
    let mut field = SpectralField::zeros(n, m)?;
    let half = n / 2;

    // Angular transform per radial row, then a Chebyshev transform per mode.
    let mut p_cos = DMatrix::zeros(half + 1, m + 1);
    let mut p_sin = DMatrix::zeros(half.saturating_sub(1), m + 1);
    let mut q_cos = DMatrix::zeros(half + 1, m + 1);
    let mut q_sin = DMatrix::zeros(half.saturating_sub(1), m + 1);
    for mi in 0..=m {
        let p_row: Vec<f64> = (0..n).map(|ni| p_samples[(mi, ni)]).collect();
        let q_row: Vec<f64> = (0..n).map(|ni| q_samples[(mi, ni)]).collect();
        let ps = real_dft(&p_row)?;
        let qs = real_dft(&q_row)?;
        for k in 0..=half {
            p_cos[(k, mi)] = ps.cos[k];
            q_cos[(k, mi)] = qs.cos[k];
        }
        for i in 0..half.saturating_sub(1) {
            p_sin[(i, mi)] = ps.sin[i];
            q_sin[(i, mi)] = qs.sin[i];
        }
    }
    for k in 0..=half {
        let pv: Vec<f64> = (0..=m).map(|mi| p_cos[(k, mi)]).collect();
        let qv: Vec<f64> = (0..=m).map(|mi| q_cos[(k, mi)]).collect();
        let pc = chebyshev_coeffs_extrema(&pv)?;
        let qc = chebyshev_coeffs_extrema(&qv)?;
        for j in 0..=m {
            field.alpha[(k, j)] = pc[j];
            field.xi[(k, j)] = qc[j];
        }
    }
    for row in 0..half.saturating_sub(1) {
        let pv: Vec<f64> = (0..=m).map(|mi| p_sin[(row, mi)]).collect();
        let qv: Vec<f64> = (0..=m).map(|mi| q_sin[(row, mi)]).collect();
        let pc = chebyshev_coeffs_extrema(&pv)?;
        let qc = chebyshev_coeffs_extrema(&qv)?;
        for j in 0..=m {
            field.beta[(row, j)] = pc[j];
            field.eta[(row, j)] = qc[j];
        }
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_field(n: usize, m: usize, seed: u64) -> SpectralField {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut field = SpectralField::zeros(n, m).unwrap();
        for block in [&mut field.alpha, &mut field.beta, &mut field.xi, &mut field.eta] {
            for v in block.iter_mut() {
                *v = rng.gen_range(-1.0..1.0);
            }
        }
        field
    }

    #[test]
    fn chebyshev_low_degrees() {
        assert_abs_diff_eq!(chebyshev_eval(0, 0.7).unwrap(), 1.0);
        assert_abs_diff_eq!(chebyshev_eval(2, 0.5).unwrap(), -0.5, epsilon = 1e-15);
        // oracle: cos(3 arccos 0.5) = cos(pi) = -1
        assert_abs_diff_eq!(chebyshev_eval(3, 0.5).unwrap(), -1.0, epsilon = 1e-14);
    }

    #[test]
    fn chebyshev_matches_trigonometric_form() {
        for j in 0..20 {
            for &x in &[-1.0, -0.813, -0.25, 0.0, 0.37, 0.99, 1.0] {
                let expected = (j as f64 * f64::acos(x)).cos();
                assert_abs_diff_eq!(
                    chebyshev_eval(j, x).unwrap(),
                    expected,
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn chebyshev_prime_matches_finite_differences() {
        let x = 0.42;
        for j in 0..12 {
            let d = 1e-6;
            let fd = (chebyshev_eval(j, x + d).unwrap() - chebyshev_eval(j, x - d).unwrap())
                / (2.0 * d);
            assert_abs_diff_eq!(chebyshev_eval_prime(j, x).unwrap(), fd, epsilon = 1e-7);
        }
    }

    #[test]
    fn chebyshev_rejects_out_of_domain() {
        assert!(chebyshev_eval(3, 1.5).is_err());
        assert!(chebyshev_eval(3, f64::NAN).is_err());
    }

    #[test]
    fn gauss_chebyshev_smallest_rules() {
        let (nodes, weights) = gauss_chebyshev_rule(0);
        assert_abs_diff_eq!(nodes[0], 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(weights[0], PI);

        let (nodes, weights) = gauss_chebyshev_rule(1);
        assert_abs_diff_eq!(nodes[0], (PI / 4.0).cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(nodes[1], (3.0 * PI / 4.0).cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(weights[0], PI / 2.0);
        assert_abs_diff_eq!(weights[1], PI / 2.0);
    }

    #[test]
    fn gauss_chebyshev_weight_sum_and_monotone_nodes() {
        for m_prime in [0, 1, 5, 16] {
            let (nodes, weights) = gauss_chebyshev_rule(m_prime);
            assert_abs_diff_eq!(weights.iter().sum::<f64>(), PI, epsilon = 1e-13);
            for w in nodes.windows(2) {
                assert!(w[0] > w[1]);
            }
        }
    }

    /// Exact monomial moments of the Chebyshev weight:
    /// int x^d (1-x^2)^{-1/2} dx = pi * (d-1)!! / d!! for even d, 0 for odd d.
    fn chebyshev_weighted_moment(d: usize) -> f64 {
        if d % 2 == 1 {
            return 0.0;
        }
        let mut v = PI;
        let mut k = d;
        while k >= 2 {
            v *= (k - 1) as f64 / k as f64;
            k -= 2;
        }
        v
    }

    #[test]
    fn gauss_chebyshev_exact_to_degree_2m_plus_1() {
        for m_prime in [0usize, 1, 3, 7] {
            let (nodes, weights) = gauss_chebyshev_rule(m_prime);
            for d in 0..=(2 * m_prime + 1) {
                let quad: f64 = nodes
                    .iter()
                    .zip(&weights)
                    .map(|(x, w)| x.powi(d as i32) * w)
                    .sum();
                let exact = chebyshev_weighted_moment(d);
                assert!(
                    (quad - exact).abs() <= 1e-12 * exact.abs().max(1.0),
                    "degree {d} at M'={m_prime}: {quad} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn fourier_rule_basics() {
        let (nodes, weights) = fourier_rule(4);
        assert_eq!(nodes.len(), 4);
        for (i, &node) in nodes.iter().enumerate() {
            assert_abs_diff_eq!(node, PI / 2.0 * i as f64, epsilon = 1e-15);
        }
        assert!(weights.iter().all(|&w| (w - PI / 2.0).abs() < 1e-15));

        // int cos(phi) dphi = 0 already with 4 nodes.
        let q: f64 = nodes.iter().zip(&weights).map(|(x, w)| x.cos() * w).sum();
        assert_abs_diff_eq!(q, 0.0, epsilon = 1e-13);

        // int cos^2(phi) dphi = pi with 8 nodes.
        let (nodes, weights) = fourier_rule(8);
        let q: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| x.cos().powi(2) * w)
            .sum();
        assert_abs_diff_eq!(q, PI, epsilon = 1e-13);
    }

    #[test]
    fn eval_field_simple_cases() {
        let field = SpectralField::zeros(8, 4).unwrap();
        let jet = field.eval_field(0.3, 1.1).unwrap();
        assert_eq!(jet, FieldJet::default());

        let mut field = SpectralField::zeros(8, 4).unwrap();
        field.alpha[(0, 0)] = 1.0;
        let jet = field.eval_field(-0.4, 2.0).unwrap();
        assert_abs_diff_eq!(jet.p, 1.0);
        assert_abs_diff_eq!(jet.p_rho, 0.0);
        assert_abs_diff_eq!(jet.p_phi, 0.0);

        let mut field = SpectralField::zeros(8, 4).unwrap();
        field.alpha[(1, 1)] = 1.0;
        let (rho, phi) = (0.37, 0.81);
        let jet = field.eval_field(rho, phi).unwrap();
        assert_abs_diff_eq!(jet.p, rho * phi.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(jet.p_rho, phi.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(jet.p_phi, -rho * phi.sin(), epsilon = 1e-15);
    }

    #[test]
    fn grid_eval_matches_pointwise() {
        let field = random_field(8, 8, 7);
        let rule = QuadratureRule::new(12, 9);
        let jets = field.eval_field_grid(&rule);
        let mut worst: f64 = 0.0;
        for (mi, &rho) in rule.chebyshev_nodes.iter().enumerate() {
            for (ni, &phi) in rule.fourier_nodes.iter().enumerate() {
                let a = jets[mi * rule.angular_count() + ni];
                let b = field.eval_field(rho, phi).unwrap();
                for (x, y) in [
                    (a.p, b.p),
                    (a.q, b.q),
                    (a.p_rho, b.p_rho),
                    (a.p_phi, b.p_phi),
                    (a.q_rho, b.q_rho),
                    (a.q_phi, b.q_phi),
                ] {
                    worst = worst.max((x - y).abs() / y.abs().max(1.0));
                }
            }
        }
        assert!(worst <= 1e-12, "worst rel deviation {worst}");
    }

    #[test]
    fn derivative_consistency_order_two() {
        // p_rho from eval_field matches centered differences at O(delta^2):
        // observed order >= 1.9 on a delta-halving sweep.
        let field = random_field(8, 6, 3);
        let (rho, phi) = (0.21, 2.6);
        let exact = field.eval_field(rho, phi).unwrap().p_rho;
        let diff_at = |d: f64| {
            let hi = field.eval_field(rho + d, phi).unwrap().p;
            let lo = field.eval_field(rho - d, phi).unwrap().p;
            ((hi - lo) / (2.0 * d) - exact).abs()
        };
        let mut prev = diff_at(1e-3);
        for i in 1..4 {
            let cur = diff_at(1e-3 / 2f64.powi(i));
            let order = (prev / cur).log2();
            assert!(order >= 1.9, "observed order {order}");
            prev = cur;
        }
    }

    #[test]
    fn real_dft_interpolates_samples() {
        let mut rng = StdRng::seed_from_u64(11);
        let n = 16;
        let samples: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let series = real_dft(&samples).unwrap();
        for (i, &s) in samples.iter().enumerate() {
            let phi = 2.0 * PI * i as f64 / n as f64;
            assert_abs_diff_eq!(series.eval(phi), s, epsilon = 1e-12);
        }
    }

    #[test]
    fn interpolation_reproduces_truncated_space() {
        // Sampling a field already in the space recovers its coefficients.
        let field = random_field(8, 6, 21);
        let rho_nodes = extrema_nodes(6);
        let phi_nodes = angular_nodes(8);
        let mut p = DMatrix::zeros(7, 8);
        let mut q = DMatrix::zeros(7, 8);
        for (mi, &rho) in rho_nodes.iter().enumerate() {
            for (ni, &phi) in phi_nodes.iter().enumerate() {
                let jet = field.eval_field(rho, phi).unwrap();
                p[(mi, ni)] = jet.p;
                q[(mi, ni)] = jet.q;
            }
        }
        let rebuilt = interpolate(&p, &q, 8, 6).unwrap();
        for (a, b) in field.alpha.iter().zip(rebuilt.alpha.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        for (a, b) in field.beta.iter().zip(rebuilt.beta.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        for (a, b) in field.xi.iter().zip(rebuilt.xi.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        for (a, b) in field.eta.iter().zip(rebuilt.eta.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn interpolation_of_constant() {
        let c = 1.375;
        let p = DMatrix::from_element(5, 8, c);
        let q = DMatrix::zeros(5, 8);
        let field = interpolate(&p, &q, 8, 4).unwrap();
        assert_abs_diff_eq!(field.alpha[(0, 0)], c, epsilon = 1e-13);
        let mut rest: f64 = 0.0;
        for (idx, v) in field.alpha.iter().enumerate() {
            if idx != 0 {
                rest = rest.max(v.abs());
            }
        }
        for block in [&field.beta, &field.xi, &field.eta] {
            for v in block.iter() {
                rest = rest.max(v.abs());
            }
        }
        assert!(rest <= 1e-13, "residual coefficient {rest}");
    }

    #[test]
    fn interpolation_shape_mismatch_is_error() {
        let p = DMatrix::zeros(5, 8);
        let q = DMatrix::zeros(4, 8);
        assert!(interpolate(&p, &q, 8, 4).is_err());
    }

    #[test]
    fn boundary_coeffs_radially_symmetric() {
        let n = 16;
        let p0 = vec![2.0; n];
        let q0 = vec![0.0; n];
        let (ps, qs) = boundary_fourier_coeffs(&p0, &q0).unwrap();
        assert_abs_diff_eq!(ps.cos[0], 2.0, epsilon = 1e-14);
        for k in 1..=n / 2 {
            assert!(ps.cos[k].abs() <= 1e-14);
        }
        for v in ps.sin.iter().chain(qs.cos.iter()).chain(qs.sin.iter()) {
            assert!(v.abs() <= 1e-14);
        }
    }

    #[test]
    fn boundary_coeffs_oval_resynthesis() {
        // u0 = (l1 x1, l2 x2) on |x| = gamma, resynthesized at the nodes.
        let (l1, l2, gamma) = (2.4, 2.0, 1.0);
        let n = 16;
        let phi_nodes = angular_nodes(n);
        let p0: Vec<f64> = phi_nodes
            .iter()
            .map(|&t| gamma * ((l1 * t.cos()).powi(2) + (l2 * t.sin()).powi(2)).sqrt())
            .collect();
        let q0: Vec<f64> = phi_nodes
            .iter()
            .map(|&t| {
                let theta = (l2 * t.sin()).atan2(l1 * t.cos());
                let mut d = theta - t;
                while d > PI {
                    d -= 2.0 * PI;
                }
                while d < -PI {
                    d += 2.0 * PI;
                }
                d
            })
            .collect();
        let (ps, qs) = boundary_fourier_coeffs(&p0, &q0).unwrap();
        for (i, &phi) in phi_nodes.iter().enumerate() {
            assert_abs_diff_eq!(ps.eval(phi), p0[i], epsilon = 1e-12);
            assert_abs_diff_eq!(qs.eval(phi), q0[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn spectral_decay_of_smooth_interpolant() {
        // Coefficients of the smooth cavity profile decay monotonically in j
        // past a small burn-in (up to a roundoff floor).
        let (eps, gamma, lambda) = (1e-2, 1.0, 2.0);
        let m = 20;
        let n = 8;
        let rho_nodes = extrema_nodes(m);
        let mut p = DMatrix::zeros(m + 1, n);
        let q = DMatrix::zeros(m + 1, n);
        for (mi, &rho) in rho_nodes.iter().enumerate() {
            let r = 0.5 * (gamma + eps) + 0.5 * (gamma - eps) * rho;
            let v = (lambda * lambda + r * r - gamma * gamma).sqrt();
            for ni in 0..n {
                p[(mi, ni)] = v;
            }
        }
        let field = interpolate(&p, &q, n, m).unwrap();
        let mags: Vec<f64> = (0..=m).map(|j| field.alpha[(0, j)].abs()).collect();
        // The complex-conjugate singularity pair makes the magnitudes
        // oscillate around a geometrically decaying envelope; compare over
        // stride two and stop above the roundoff floor.
        for j in 1..13 {
            assert!(
                mags[j + 2] <= mags[j] + 1e-14,
                "no decay at j={j}: {} -> {}",
                mags[j],
                mags[j + 2]
            );
        }
    }
}
