//! Discrete elastic energy, equilibrium residual, boundary elimination,
//! and the packing of free coefficients into the unknown vector.
//!
//! The Dirichlet data fixes the combination `sum_j alpha_{k,j} = a_k`
//! (and likewise for `beta`, `xi`, `eta`), so the degree-zero Chebyshev
//! coefficients are eliminated:
//!
//! ```text
//! alpha_{k,0} = a_k - sum_{j>=1} alpha_{k,j}
//! ```
//!
//! which leaves `2NM` free coefficients. Differentiating the discrete
//! energy with respect to a free coefficient produces the test functions
//! `cos(k phi) (T_j(rho) - 1)` and `sin(k phi) (T_j(rho) - 1)`; the
//! residual assembled against that basis is exactly the gradient of the
//! discrete energy.
//!
//! All quadrature sums run node-major in a fixed order, so results are
//! bit-reproducible.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::basis::{FourierSeries, QuadratureRule, SpectralField};
use crate::error::{Error, Inadmissible, Result};
use crate::model::{kinematics_at_radius, AnnulusDomain, BoundaryStretch, MaterialModel};

/// Discrete Fourier coefficients of the boundary traces.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    /// Coefficients `{a_k, b_k}` of `P_0(1, phi)`.
    pub p: FourierSeries,
    /// Coefficients `{c_k, d_k}` of `Q_0(1, phi)`.
    pub q: FourierSeries,
    n: usize,
}

impl BoundaryData {
    /// Boundary coefficients from samples at the `N` angular nodes.
    pub fn from_samples(p0: &[f64], q0: &[f64]) -> Result<Self> {
        let (p, q) = crate::basis::boundary_fourier_coeffs(p0, q0)?;
        Ok(BoundaryData {
            p,
            q,
            n: p0.len(),
        })
    }

    /// Boundary coefficients induced by an outer-boundary stretch.
    pub fn from_stretch(stretch: &BoundaryStretch, n: usize, gamma: f64) -> Result<Self> {
        let (p0, q0) = stretch.samples(n, gamma)?;
        Self::from_samples(&p0, &q0)
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Flat vector of the `2NM` free coefficients, packed as the blocks
/// `alpha` (k-major, then `j = 1..=M`), then `beta`, `xi`, `eta`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnknownVector {
    n: usize,
    m: usize,
    pub data: DVector<f64>,
}

impl UnknownVector {
    pub fn zeros(n: usize, m: usize) -> Result<Self> {
        // Reuse the shape validation of the coefficient container.
        SpectralField::zeros(n, m)?;
        Ok(UnknownVector {
            n,
            m,
            data: DVector::zeros(2 * n * m),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn from_vector(n: usize, m: usize, data: DVector<f64>) -> Result<Self> {
        if data.len() != 2 * n * m {
            return Err(Error::ShapeMismatch {
                what: "unknown vector",
                expected: format!("{}", 2 * n * m),
                got: format!("{}", data.len()),
            });
        }
        Ok(UnknownVector { n, m, data })
    }

    /// Extract the free coefficients (`j >= 1`) of a field. The degree-zero
    /// column is ignored: the eliminated representation is canonical.
    pub fn pack(field: &SpectralField) -> Self {
        let (n, m) = (field.n(), field.m());
        let half = n / 2;
        let mut data = DVector::zeros(2 * n * m);
        let mut idx = 0;
        for k in 0..=half {
            for j in 1..=m {
                data[idx] = field.alpha[(k, j)];
                idx += 1;
            }
        }
        for row in 0..half - 1 {
            for j in 1..=m {
                data[idx] = field.beta[(row, j)];
                idx += 1;
            }
        }
        for k in 0..=half {
            for j in 1..=m {
                data[idx] = field.xi[(k, j)];
                idx += 1;
            }
        }
        for row in 0..half - 1 {
            for j in 1..=m {
                data[idx] = field.eta[(row, j)];
                idx += 1;
            }
        }
        UnknownVector { n, m, data }
    }
}

/// Rebuild the full coefficient field from free coefficients and boundary
/// data, applying the elimination formulas for the degree-zero column.
/// The result satisfies `P(1, phi_n) = P_0(1, phi_n)` exactly.
pub fn assemble_field(y: &UnknownVector, bc: &BoundaryData) -> Result<SpectralField> {
    if bc.n != y.n {
        return Err(Error::ShapeMismatch {
            what: "boundary data",
            expected: format!("{}", y.n),
            got: format!("{}", bc.n),
        });
    }
    let (n, m) = (y.n, y.m);
    let half = n / 2;
    let mut field = SpectralField::zeros(n, m)?;
    let mut idx = 0;
    for k in 0..=half {
        let mut sum = 0.0;
        for j in 1..=m {
            field.alpha[(k, j)] = y.data[idx];
            sum += y.data[idx];
            idx += 1;
        }
        field.alpha[(k, 0)] = bc.p.cos[k] - sum;
    }
    for row in 0..half - 1 {
        let mut sum = 0.0;
        for j in 1..=m {
            field.beta[(row, j)] = y.data[idx];
            sum += y.data[idx];
            idx += 1;
        }
        field.beta[(row, 0)] = bc.p.sin[row] - sum;
    }
    for k in 0..=half {
        let mut sum = 0.0;
        for j in 1..=m {
            field.xi[(k, j)] = y.data[idx];
            sum += y.data[idx];
            idx += 1;
        }
        field.xi[(k, 0)] = bc.q.cos[k] - sum;
    }
    for row in 0..half - 1 {
        let mut sum = 0.0;
        for j in 1..=m {
            field.eta[(row, j)] = y.data[idx];
            sum += y.data[idx];
            idx += 1;
        }
        field.eta[(row, 0)] = bc.q.sin[row] - sum;
    }
    Ok(field)
}

/// Energy and orientation diagnostics of one state.
#[derive(Debug, Clone, Copy)]
pub struct EnergyEval {
    pub energy: f64,
    pub min_d: f64,
}

/// Residual (discrete energy gradient) and orientation diagnostics.
#[derive(Debug, Clone)]
pub struct ResidualEval {
    pub residual: DVector<f64>,
    pub min_d: f64,
}

/// Precomputed tables for evaluating the discretized equilibrium system at
/// a fixed resolution. All methods are pure in the unknown vector.
pub struct Assembler {
    pub domain: AnnulusDomain,
    pub material: MaterialModel,
    pub bc: BoundaryData,
    pub rule: QuadratureRule,
    n: usize,
    m: usize,
    /// `T_j(rho_m') - 1` for `j = 1..=M`, radial-major: `[m'][j-1]`.
    test_val: Vec<f64>,
    /// `T_j'(rho_m')` for `j = 1..=M`, radial-major: `[m'][j-1]`.
    test_der: Vec<f64>,
    /// `cos(k phi_n')`, angular-major: `[n'][k]`, `k = 0..=N/2`.
    cos_tab: Vec<f64>,
    /// `sin(k phi_n')`, angular-major.
    sin_tab: Vec<f64>,
    /// `sqrt(1 - rho^2) w^C` per radial node.
    w_rad: Vec<f64>,
    /// `r(rho_m')` per radial node.
    r_vals: Vec<f64>,
}

impl Assembler {
    /// Build the tables for truncation `(n, m)` with `n_q` angular and
    /// `m_q + 1` radial quadrature nodes.
    pub fn new(
        domain: AnnulusDomain,
        material: MaterialModel,
        bc: BoundaryData,
        n: usize,
        m: usize,
        n_q: usize,
        m_q: usize,
    ) -> Result<Self> {
        SpectralField::zeros(n, m)?;
        if bc.n != n {
            return Err(Error::ShapeMismatch {
                what: "boundary data",
                expected: format!("{n}"),
                got: format!("{}", bc.n),
            });
        }
        let rule = QuadratureRule::new(n_q, m_q);
        let half = n / 2;
        let n_rad = rule.radial_count();
        let n_ang = rule.angular_count();

        let mut test_val = vec![0.0; n_rad * m];
        let mut test_der = vec![0.0; n_rad * m];
        let mut t = vec![0.0; m + 1];
        let mut dt = vec![0.0; m + 1];
        for (mi, &rho) in rule.chebyshev_nodes.iter().enumerate() {
            chebyshev_tables(rho, &mut t, &mut dt);
            for j in 1..=m {
                test_val[mi * m + j - 1] = t[j] - 1.0;
                test_der[mi * m + j - 1] = dt[j];
            }
        }
        let mut cos_tab = vec![0.0; n_ang * (half + 1)];
        let mut sin_tab = vec![0.0; n_ang * (half + 1)];
        for (ni, &phi) in rule.fourier_nodes.iter().enumerate() {
            for k in 0..=half {
                cos_tab[ni * (half + 1) + k] = (k as f64 * phi).cos();
                sin_tab[ni * (half + 1) + k] = (k as f64 * phi).sin();
            }
        }
        let w_rad: Vec<f64> = rule
            .chebyshev_nodes
            .iter()
            .zip(&rule.chebyshev_weights)
            .map(|(&rho, &w)| (1.0 - rho * rho).sqrt() * w)
            .collect();
        let r_vals: Vec<f64> = rule
            .chebyshev_nodes
            .iter()
            .map(|&rho| domain.rho_to_r(rho))
            .collect();
        Ok(Assembler {
            domain,
            material,
            bc,
            rule,
            n,
            m,
            test_val,
            test_der,
            cos_tab,
            sin_tab,
            w_rad,
            r_vals,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Unknown count `2NM`.
    pub fn dim(&self) -> usize {
        2 * self.n * self.m
    }

    pub fn assemble(&self, y: &UnknownVector) -> Result<SpectralField> {
        assemble_field(y, &self.bc)
    }

    /// Discrete elastic energy
    /// `E(y) = sum [g(F) + h(D)] (r / rho_r) sqrt(1 - rho^2) w^C w^F`,
    /// with the inadmissible-state signal carrying the first node where
    /// the orientation fails.
    pub fn energy(&self, y: &UnknownVector) -> std::result::Result<EnergyEval, Inadmissible> {
        let field = self.assemble(y).expect("validated shapes");
        let jets = field.eval_field_grid(&self.rule);
        let n_ang = self.rule.angular_count();
        let rho_r = self.domain.rho_r();
        let w_ang = self.rule.fourier_weights[0];
        let mut energy = 0.0;
        let mut min_d = f64::INFINITY;
        for mi in 0..self.rule.radial_count() {
            let r = self.r_vals[mi];
            let w_row = self.w_rad[mi] * w_ang * r / rho_r;
            for ni in 0..n_ang {
                let jet = &jets[mi * n_ang + ni];
                let (d, f) = kinematics_at_radius(jet, rho_r, r);
                if d <= 0.0 {
                    return Err(Inadmissible {
                        radial_index: mi,
                        angular_index: ni,
                        det: d,
                    });
                }
                min_d = min_d.min(d);
                energy += w_row * (self.material.g_raw(f) + self.material.h_unguarded(d));
            }
        }
        Ok(EnergyEval { energy, min_d })
    }

    /// Residual of the discretized equilibrium equations: the gradient of
    /// [`Assembler::energy`] with respect to the free coefficients,
    /// ordered like [`UnknownVector`].
    pub fn residual(&self, y: &UnknownVector) -> std::result::Result<ResidualEval, Inadmissible> {
        let field = self.assemble(y).expect("validated shapes");
        let jets = field.eval_field_grid(&self.rule);
        let (n, m) = (self.n, self.m);
        let half = n / 2;
        let n_ang = self.rule.angular_count();
        let rho_r = self.domain.rho_r();
        let w_ang = self.rule.fourier_weights[0];

        let off_beta = (half + 1) * m;
        let off_xi = off_beta + (half - 1) * m;
        let off_eta = off_xi + (half + 1) * m;

        let mut out = DVector::zeros(self.dim());
        let res = out.as_mut_slice();
        let mut min_d = f64::INFINITY;
        for mi in 0..self.rule.radial_count() {
            let r = self.r_vals[mi];
            let w_row = self.w_rad[mi] * w_ang;
            let r_rho_r = r * rho_r;
            let tv = &self.test_val[mi * m..(mi + 1) * m];
            let td = &self.test_der[mi * m..(mi + 1) * m];
            for ni in 0..n_ang {
                let jet = &jets[mi * n_ang + ni];
                let (d, f) = kinematics_at_radius(jet, rho_r, r);
                if d <= 0.0 {
                    return Err(Inadmissible {
                        radial_index: mi,
                        angular_index: ni,
                        det: d,
                    });
                }
                min_d = min_d.min(d);
                let gp = self.material.g_prime_raw(f);
                let hp = self.material.h_prime_unguarded(d);
                let qp1 = jet.q_phi + 1.0;

                // Integrand factors against the P test function and its
                // derivatives, then the Q counterparts.
                let a1 = gp * (r_rho_r * jet.p * jet.q_rho * jet.q_rho
                    + jet.p * qp1 * qp1 / r_rho_r)
                    + hp * (jet.p_rho * qp1 - jet.p_phi * jet.q_rho);
                let a2 = gp * r_rho_r * jet.p_rho + hp * jet.p * qp1;
                let a3 = gp * jet.p_phi / r_rho_r - hp * jet.p * jet.q_rho;
                let b1 = jet.p * (gp * r_rho_r * jet.p * jet.q_rho - hp * jet.p_phi);
                let b2 = jet.p * (gp * jet.p * qp1 / r_rho_r + hp * jet.p_rho);

                let cs = &self.cos_tab[ni * (half + 1)..(ni + 1) * (half + 1)];
                let ss = &self.sin_tab[ni * (half + 1)..(ni + 1) * (half + 1)];
                for k in 0..=half {
                    let kf = k as f64;
                    let (ck, sk) = (cs[k], ss[k]);
                    let c1 = w_row * (a1 * ck - kf * a3 * sk);
                    let c2 = w_row * a2 * ck;
                    let base = k * m;
                    for j in 0..m {
                        res[base + j] += c1 * tv[j] + c2 * td[j];
                    }
                    let c1q = -w_row * kf * b2 * sk;
                    let c2q = w_row * b1 * ck;
                    let base = off_xi + k * m;
                    for j in 0..m {
                        res[base + j] += c1q * tv[j] + c2q * td[j];
                    }
                }
                for row in 0..half - 1 {
                    let kf = (row + 1) as f64;
                    let (ck, sk) = (cs[row + 1], ss[row + 1]);
                    let c1 = w_row * (a1 * sk + kf * a3 * ck);
                    let c2 = w_row * a2 * sk;
                    let base = off_beta + row * m;
                    for j in 0..m {
                        res[base + j] += c1 * tv[j] + c2 * td[j];
                    }
                    let c1q = w_row * kf * b2 * ck;
                    let c2q = w_row * b1 * sk;
                    let base = off_eta + row * m;
                    for j in 0..m {
                        res[base + j] += c1q * tv[j] + c2q * td[j];
                    }
                }
            }
        }
        Ok(ResidualEval {
            residual: out,
            min_d,
        })
    }

    /// Minimum determinant over the quadrature grid without the
    /// inadmissibility signal (diagnostics).
    pub fn min_d(&self, y: &UnknownVector) -> Result<f64> {
        let field = self.assemble(y)?;
        let diag = crate::model::h2_diagnostics(&field, &self.domain, &self.rule);
        Ok(diag.min_d)
    }

    /// Forward-difference Jacobian of the residual, column `j` stepped by
    /// `max(1e-7, 1e-7 |y_j|)`. Approximately symmetric since the residual
    /// is an energy gradient. Columns evaluate in parallel.
    pub fn jacobian_fd(
        &self,
        y: &UnknownVector,
    ) -> std::result::Result<DMatrix<f64>, Inadmissible> {
        let base = self.residual(y)?;
        jacobian_fd(
            &y.data,
            &base.residual,
            |v| {
                let yv = UnknownVector {
                    n: self.n,
                    m: self.m,
                    data: v.clone(),
                };
                self.residual(&yv).map(|r| r.residual)
            },
        )
    }
}

/// Forward-difference Jacobian of a vector map `f` around `y0` with
/// precomputed `f(y0)`; falls back to a backward difference for columns
/// whose forward point is inadmissible.
pub fn jacobian_fd<F>(
    y0: &DVector<f64>,
    f0: &DVector<f64>,
    f: F,
) -> std::result::Result<DMatrix<f64>, Inadmissible>
where
    F: Fn(&DVector<f64>) -> std::result::Result<DVector<f64>, Inadmissible> + Sync,
{
    let dim = y0.len();
    let columns: Vec<std::result::Result<DVector<f64>, Inadmissible>> = (0..dim)
        .into_par_iter()
        .map(|j| {
            let delta = (1e-7 * y0[j].abs()).max(1e-7);
            let mut shifted = y0.clone();
            shifted[j] += delta;
            match f(&shifted) {
                Ok(fj) => Ok((fj - f0) / delta),
                Err(_) => {
                    shifted[j] = y0[j] - delta;
                    let fj = f(&shifted)?;
                    Ok((f0 - fj) / delta)
                }
            }
        })
        .collect();
    let mut jac = DMatrix::zeros(dim, dim);
    for (j, col) in columns.into_iter().enumerate() {
        jac.set_column(j, &col?);
    }
    Ok(jac)
}

fn chebyshev_tables(x: f64, t: &mut [f64], dt: &mut [f64]) {
    let len = t.len();
    t[0] = 1.0;
    dt[0] = 0.0;
    if len > 1 {
        t[1] = x;
        dt[1] = 1.0;
    }
    for j in 2..len {
        t[j] = 2.0 * x * t[j - 1] - t[j - 2];
        dt[j] = 2.0 * t[j - 1] + 2.0 * x * dt[j - 1] - dt[j - 2];
    }
}
