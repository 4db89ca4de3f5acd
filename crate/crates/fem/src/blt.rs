//! The source-to-boundary-mismatch operator `K = K_D − K_N`, synthetic
//! measurements and reconstruction drivers.

use accreg_core::linop::{LinearOperator, Metric};
use accreg_core::noise::{add_uniform_noise, NoiseSpec};
use accreg_core::solvers::{Admissibility, Method, RunRecord, SchemeParams, Solver, StoppingRule};
use std::sync::Mutex;

use nalgebra::{Cholesky, DMatrix, DVectorView, DVectorViewMut, Dyn};
use nalgebra_sparse::CsrMatrix;

use crate::assembly::FemSystem;
use crate::cg::spmv;
use crate::error::{invalid, FemError, Result};
use crate::mesh::{Mesh, Point};

/// `⟨a, b⟩ = aᵀ M b` for a symmetric positive definite sparse `M`.
#[derive(Debug, Clone)]
pub struct MassMetric {
    matrix: CsrMatrix<f64>,
}

impl MassMetric {
    pub fn new(matrix: CsrMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(invalid("mass metric must be square"));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &CsrMatrix<f64> {
        &self.matrix
    }
}

impl Metric for MassMetric {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let (offsets, cols, vals) = (
            self.matrix.row_offsets(),
            self.matrix.col_indices(),
            self.matrix.values(),
        );
        let mut sum = 0.0;
        for (i, ai) in a.iter().enumerate() {
            let range = offsets[i]..offsets[i + 1];
            let row: f64 = cols[range.clone()]
                .iter()
                .zip(&vals[range])
                .map(|(&j, v)| v * b[j])
                .sum();
            sum += ai * row;
        }
        sum
    }
}

/// Last solutions of the four solves per iteration, reused as CG starting
/// points. Consecutive iterates change little, so this saves most of the
/// CG work late in a run.
#[derive(Debug, Default)]
struct WarmStarts {
    forward_d: Vec<f64>,
    forward_n: Vec<f64>,
    adjoint_d: Vec<f64>,
    adjoint_n: Vec<f64>,
}

/// `K f = u_D(f, 0) − u_N(f, 0)` from `L²(Ω₀)` (metric `C0`) to nodal
/// fields on `Ω` (metric `C`).
///
/// Unless built with [`BltOperator::cold`], each instance keeps its last
/// solutions as CG starting points. Results then depend on the call
/// history at the level of the CG tolerance, so use one instance per run
/// when bit-identical output matters.
#[derive(Debug)]
pub struct BltOperator<'a> {
    sys: &'a FemSystem,
    source: MassMetric,
    data: MassMetric,
    warm: Option<Mutex<WarmStarts>>,
}

impl Clone for BltOperator<'_> {
    /// The clone starts with fresh warm-start buffers.
    fn clone(&self) -> Self {
        Self {
            sys: self.sys,
            source: self.source.clone(),
            data: self.data.clone(),
            warm: self
                .warm
                .as_ref()
                .map(|_| Mutex::new(WarmStarts::default())),
        }
    }
}

impl<'a> BltOperator<'a> {
    pub fn new(sys: &'a FemSystem) -> Result<Self> {
        Ok(Self {
            sys,
            source: MassMetric::new(sys.omega0_mass().clone())?,
            data: MassMetric::new(sys.plain_mass().clone())?,
            warm: Some(Mutex::new(WarmStarts::default())),
        })
    }

    /// Every solve starts from zero.
    pub fn cold(sys: &'a FemSystem) -> Result<Self> {
        Ok(Self {
            warm: None,
            ..Self::new(sys)?
        })
    }

    pub fn system(&self) -> &FemSystem {
        self.sys
    }

    fn dirichlet_minus_neumann(&self, rhs: &[f64], adjoint: bool) -> Result<Vec<f64>> {
        let (ud, un) = match &self.warm {
            None => (
                self.sys.dirichlet_solve(rhs, None)?,
                self.sys.neumann_solve(rhs)?,
            ),
            Some(lock) => {
                let mut warm = lock.lock().unwrap_or_else(|e| e.into_inner());
                let warm = &mut *warm;
                let (d, n) = if adjoint {
                    (&mut warm.adjoint_d, &mut warm.adjoint_n)
                } else {
                    (&mut warm.forward_d, &mut warm.forward_n)
                };
                d.resize(self.sys.n_interior(), 0.0);
                n.resize(self.sys.n_nodes(), 0.0);
                let ud = self.sys.dirichlet_solve_warm(rhs, None, d)?;
                self.sys.neumann_solve_warm(rhs, n)?;
                (ud, n.clone())
            }
        };
        Ok(ud.iter().zip(&un).map(|(a, b)| a - b).collect())
    }

    /// `y = ũ_N(g₂) − ũ_D(g₁)`, the data term with zero source.
    pub fn data_field(&self, g1: &[f64], g2: &[f64]) -> Result<Vec<f64>> {
        let zero = vec![0.0; self.sys.n_nodes()];
        let un = self.sys.neumann_solve(&self.sys.boundary_load(g2)?)?;
        let ud = self.sys.dirichlet_solve(&zero, Some(g1))?;
        Ok(un.iter().zip(&ud).map(|(a, b)| a - b).collect())
    }

    /// `K*(K 1)` normalized against `1`: `‖1‖_{C0} / ‖K*K 1‖_{C0}`, a
    /// step-size scale for the ν-method and Nesterov.
    pub fn omega_norm(&self) -> Result<f64> {
        let ones = vec![1.0; self.source_dim()];
        let w = self.apply_adjoint(&self.apply(&ones)?)?;
        let denom = self.source.norm(&w);
        if denom == 0.0 {
            return Err(invalid("K*K annihilates the constant source"));
        }
        Ok(self.source.norm(&ones) / denom)
    }

    /// `‖f − f†‖_{C0} / ‖f†‖_{C0}`.
    pub fn relative_error(&self, f: &[f64], f_true: &[f64]) -> Result<f64> {
        relative_error(self.sys, f, f_true)
    }

    /// Singular values of `K` between the weighted spaces, descending,
    /// from a dense factorization. Meant for small meshes.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        MatrixOperator::from_operator(self)?.singular_values()
    }
}

impl LinearOperator for BltOperator<'_> {
    fn source_dim(&self) -> usize {
        self.sys.n_source()
    }

    fn data_dim(&self) -> usize {
        self.sys.n_nodes()
    }

    fn source_metric(&self) -> &dyn Metric {
        &self.source
    }

    fn data_metric(&self) -> &dyn Metric {
        &self.data
    }

    fn apply_into(&self, f: &[f64], out: &mut [f64]) -> accreg_core::Result<()> {
        let rhs = self.sys.source_load(f)?;
        out.copy_from_slice(&self.dirichlet_minus_neumann(&rhs, false)?);
        Ok(())
    }

    /// `(w_D − w_N)|_{Ω₀}` with `L w_D = C v`, `w_D|_Γ = 0` and `L w_N = C v`.
    fn apply_adjoint_into(&self, v: &[f64], out: &mut [f64]) -> accreg_core::Result<()> {
        let mut rhs = vec![0.0; v.len()];
        spmv(self.sys.plain_mass(), v, &mut rhs);
        let w = self.dirichlet_minus_neumann(&rhs, true)?;
        out.copy_from_slice(&self.sys.restrict_source(&w));
        Ok(())
    }
}

/// `K` stored as a dense matrix, with the same metrics as the
/// [`BltOperator`] it came from.
///
/// Building one costs two solves per source unknown; afterwards `K` is a
/// dense product and `K* = C0⁻¹ Kᵀ C` a product plus a small dense
/// Cholesky solve. Pays off when many iterations or runs share one system.
#[derive(Debug, Clone)]
pub struct MatrixOperator {
    k: DMatrix<f64>,
    source_chol: Cholesky<f64, Dyn>,
    source: MassMetric,
    data: MassMetric,
}

fn dense(m: &CsrMatrix<f64>) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(m.nrows(), m.ncols());
    for (i, j, v) in m.triplet_iter() {
        d[(i, j)] = *v;
    }
    d
}

fn cholesky(m: &CsrMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(dense(m)).ok_or_else(|| invalid("mass matrix is not positive definite"))
}

impl MatrixOperator {
    pub fn from_operator(op: &BltOperator<'_>) -> Result<Self> {
        let (n, n0) = (op.data_dim(), op.source_dim());
        let mut k = DMatrix::zeros(n, n0);
        let mut e = vec![0.0; n0];
        for j in 0..n0 {
            e[j] = 1.0;
            op.apply_into(&e, k.column_mut(j).as_mut_slice())?;
            e[j] = 0.0;
        }
        Ok(Self {
            k,
            source_chol: cholesky(op.source.matrix())?,
            source: op.source.clone(),
            data: op.data.clone(),
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.k
    }

    /// Singular values of `K` between the weighted spaces, descending.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        let lc = cholesky(self.data.matrix())?.l();
        // σ(K) = σ(L_Cᵀ K L_0^{-T}).
        let a = lc.transpose() * &self.k;
        let b = self
            .source_chol
            .l()
            .solve_lower_triangular(&a.transpose())
            .ok_or_else(|| invalid("singular source mass"))?
            .transpose();
        let mut sv: Vec<f64> = b.singular_values().iter().copied().collect();
        sv.sort_by(|x, y| y.total_cmp(x));
        Ok(sv)
    }
}

impl LinearOperator for MatrixOperator {
    fn source_dim(&self) -> usize {
        self.k.ncols()
    }

    fn data_dim(&self) -> usize {
        self.k.nrows()
    }

    fn source_metric(&self) -> &dyn Metric {
        &self.source
    }

    fn data_metric(&self) -> &dyn Metric {
        &self.data
    }

    fn apply_into(&self, f: &[f64], out: &mut [f64]) -> accreg_core::Result<()> {
        let f = DVectorView::from_slice(f, f.len());
        let mut y = DVectorViewMut::from_slice(out, self.k.nrows());
        y.gemv(1.0, &self.k, &f, 0.0);
        Ok(())
    }

    fn apply_adjoint_into(&self, v: &[f64], out: &mut [f64]) -> accreg_core::Result<()> {
        let mut cv = vec![0.0; v.len()];
        spmv(self.data.matrix(), v, &mut cv);
        let cv = DVectorView::from_slice(&cv, cv.len());
        let mut y = DVectorViewMut::from_slice(out, self.k.ncols());
        y.gemv_tr(1.0, &self.k, &cv, 0.0);
        self.source_chol.solve_mut(&mut y);
        Ok(())
    }
}

pub fn relative_error(sys: &FemSystem, f: &[f64], f_true: &[f64]) -> Result<f64> {
    if f.len() != sys.n_source() || f_true.len() != sys.n_source() {
        return Err(invalid(
            "relative error needs two source vectors on the Ω₀ nodes",
        ));
    }
    let metric = MassMetric::new(sys.omega0_mass().clone())?;
    let diff: Vec<f64> = f.iter().zip(f_true).map(|(a, b)| a - b).collect();
    let denom = metric.norm(f_true);
    if denom == 0.0 {
        return Err(invalid("relative error against a zero ground truth"));
    }
    Ok(metric.norm(&diff) / denom)
}

/// Whether the data mesh was fine enough to avoid an inverse crime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshCheck {
    Ok,
    /// The measurement mesh has fewer than four times the elements of the
    /// reconstruction mesh.
    InverseCrime,
}

/// Boundary measurements on the reconstruction mesh's boundary nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    /// Exact outgoing flux `g = −D ∂_ν u†`.
    pub g: Vec<f64>,
    /// Flux after the noise model.
    pub g_noisy: Vec<f64>,
    /// `g₁ = g⁻ + 2A g^δ`.
    pub g1: Vec<f64>,
    /// `g₂ = −g^δ`.
    pub g2: Vec<f64>,
    pub g_minus: f64,
    /// `‖y^δ − y‖_C` on the reconstruction mesh.
    pub delta: f64,
    pub mesh_check: MeshCheck,
}

/// Interpolates nodal boundary values of `from` at the boundary nodes of
/// `to` by projecting each onto the nearest boundary edge of `from`.
pub fn transfer_boundary(from: &Mesh, values: &[f64], to: &Mesh) -> Result<Vec<f64>> {
    if values.len() != from.n_nodes() {
        return Err(invalid(
            "boundary transfer expects nodal values on the source mesh",
        ));
    }
    let project = |p: Point| {
        let mut best = (f64::INFINITY, 0.0);
        for e in from.boundary_edges() {
            let (a, b) = (from.nodes()[e[0]], from.nodes()[e[1]]);
            let d = [b[0] - a[0], b[1] - a[1]];
            let len2 = d[0] * d[0] + d[1] * d[1];
            let s = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
            let q = [a[0] + s * d[0], a[1] + s * d[1]];
            let dist = (p[0] - q[0]).hypot(p[1] - q[1]);
            if dist < best.0 {
                best = (dist, (1.0 - s) * values[e[0]] + s * values[e[1]]);
            }
        }
        best.1
    };
    Ok(to
        .boundary_nodes()
        .iter()
        .map(|&i| project(to.nodes()[i]))
        .collect())
}

/// Forward Robin solve on `fine`, flux extraction, transfer to the
/// boundary of `coarse`, and the uniform noise model applied to the flux.
pub fn simulate_measurements(
    fine: &FemSystem,
    coarse: &FemSystem,
    f_true: impl Fn(Point) -> f64,
    g_minus: f64,
    noise: &NoiseSpec,
) -> Result<BoundaryData> {
    let a = fine.coefficients().robin_a;
    if (coarse.coefficients().robin_a - a).abs() > 1e-12 * a {
        return Err(invalid(
            "measurement and reconstruction meshes use different Robin constants",
        ));
    }
    let f_fine: Vec<f64> = fine
        .mesh()
        .omega0_nodes()
        .iter()
        .map(|&i| f_true(fine.mesh().nodes()[i]))
        .collect();
    let u = fine.solve_robin(&f_fine, g_minus)?;
    let flux: Vec<f64> = u.iter().map(|v| (v - g_minus) / (2.0 * a)).collect();
    let g = transfer_boundary(fine.mesh(), &flux, coarse.mesh())?;
    let g_noisy = add_uniform_noise(&g, noise);
    let channels = |gv: &[f64]| -> (Vec<f64>, Vec<f64>) {
        (
            gv.iter().map(|x| g_minus + 2.0 * a * x).collect(),
            gv.iter().map(|x| -x).collect(),
        )
    };
    let (g1, g2) = channels(&g_noisy);
    let delta = if noise.relative_level() == 0.0 {
        0.0
    } else {
        let op = BltOperator::cold(coarse)?;
        let (c1, c2) = channels(&g);
        let clean = op.data_field(&c1, &c2)?;
        let noisy = op.data_field(&g1, &g2)?;
        let diff: Vec<f64> = noisy.iter().zip(&clean).map(|(x, y)| x - y).collect();
        op.data_metric().norm(&diff)
    };
    let mesh_check = if fine.mesh().n_triangles() >= 4 * coarse.mesh().n_triangles() {
        MeshCheck::Ok
    } else {
        MeshCheck::InverseCrime
    };
    Ok(BoundaryData {
        g,
        g_noisy,
        g1,
        g2,
        g_minus,
        delta,
        mesh_check,
    })
}

/// One regularized reconstruction from boundary data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reconstruction {
    pub method: Method,
    pub params: SchemeParams,
    pub stop: StoppingRule,
    pub admissibility: Admissibility,
}

/// Runs `recon` against the noisy data of `data`, matrix-free.
pub fn reconstruct(
    op: &BltOperator<'_>,
    data: &BoundaryData,
    recon: &Reconstruction,
    f0: &[f64],
    f_true: Option<&[f64]>,
) -> Result<RunRecord> {
    let y = op.data_field(&data.g1, &data.g2)?;
    reconstruct_with(op, &y, recon, f0, f_true)
}

/// Runs `recon` for data `y_delta` with any realization of `K`.
pub fn reconstruct_with(
    op: &dyn LinearOperator,
    y_delta: &[f64],
    recon: &Reconstruction,
    f0: &[f64],
    f_true: Option<&[f64]>,
) -> Result<RunRecord> {
    let solver =
        Solver::new(recon.method, recon.params, op, recon.admissibility).map_err(FemError::from)?;
    Ok(solver.run(y_delta, f0, recon.stop, f_true)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::Coefficients;
    use crate::mesh::{disk_mesh, Region};

    fn small() -> FemSystem {
        let mesh = disk_mesh(1)
            .unwrap()
            .mark_omega0(&Region::Square {
                center: [0.0, 0.0],
                half_width: 0.5,
            })
            .unwrap();
        FemSystem::assemble(mesh, Coefficients::tissue()).unwrap()
    }

    #[test]
    fn zero_maps_to_zero() {
        let sys = small();
        let op = BltOperator::new(&sys).unwrap();
        assert!(op
            .apply(&vec![0.0; op.source_dim()])
            .unwrap()
            .iter()
            .all(|v| *v == 0.0));
        assert!(op
            .apply_adjoint(&vec![0.0; op.data_dim()])
            .unwrap()
            .iter()
            .all(|v| *v == 0.0));
    }

    #[test]
    fn residual_identity() {
        let sys = small();
        let op = BltOperator::new(&sys).unwrap();
        let nb = sys.n_boundary();
        let g1: Vec<f64> = (0..nb).map(|i| (i as f64 * 0.2).cos()).collect();
        let g2: Vec<f64> = (0..nb).map(|i| (i as f64 * 0.3).sin()).collect();
        let f: Vec<f64> = (0..sys.n_source()).map(|i| 1.0 + 0.01 * i as f64).collect();
        let y = op.data_field(&g1, &g2).unwrap();
        let kf = op.apply(&f).unwrap();
        let ud = sys.solve_dirichlet(&f, &g1).unwrap();
        let un = sys.solve_neumann(&f, &g2).unwrap();
        for i in 0..kf.len() {
            let lhs = kf[i] - y[i];
            let rhs = ud[i] - un[i];
            assert!(
                (lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()),
                "{i}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn dense_form_matches_matrix_free() {
        let mesh = disk_mesh(0)
            .unwrap()
            .mark_omega0(&Region::Square {
                center: [0.0, 0.0],
                half_width: 0.5,
            })
            .unwrap();
        let sys = FemSystem::assemble(mesh, Coefficients::tissue()).unwrap();
        let op = BltOperator::cold(&sys).unwrap();
        let dense = MatrixOperator::from_operator(&op).unwrap();
        let f: Vec<f64> = (0..op.source_dim()).map(|i| (i as f64).sin()).collect();
        let v: Vec<f64> = (0..op.data_dim()).map(|i| (i as f64 * 0.7).cos()).collect();
        let pairs = [
            (op.apply(&f).unwrap(), dense.apply(&f).unwrap()),
            (
                op.apply_adjoint(&v).unwrap(),
                dense.apply_adjoint(&v).unwrap(),
            ),
        ];
        for (a, b) in pairs {
            let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= 1e-8 * scale));
        }
    }

    #[test]
    fn relative_error_examples() {
        let sys = small();
        let t: Vec<f64> = (0..sys.n_source()).map(|i| 1.0 + (i % 3) as f64).collect();
        assert_eq!(relative_error(&sys, &t, &t).unwrap(), 0.0);
        assert!((relative_error(&sys, &vec![0.0; t.len()], &t).unwrap() - 1.0).abs() < 1e-15);
        let twice: Vec<f64> = t.iter().map(|v| 2.0 * v).collect();
        assert!((relative_error(&sys, &twice, &t).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn transfer_reproduces_linear_traces() {
        let fine = disk_mesh(2).unwrap();
        let coarse = disk_mesh(0).unwrap();
        let vals: Vec<f64> = fine.nodes().iter().map(|p| 2.0 * p[0] - p[1]).collect();
        let out = transfer_boundary(&fine, &vals, &coarse).unwrap();
        for (&i, v) in coarse.boundary_nodes().iter().zip(&out) {
            let p = coarse.nodes()[i];
            assert!((v - (2.0 * p[0] - p[1])).abs() < 1e-12);
        }
    }
}
