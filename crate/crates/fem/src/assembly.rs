//! P1 assembly of the stiffness, mass, boundary mass and source coupling
//! matrices, and the Dirichlet, Neumann and Robin solves built on them.

use nalgebra_sparse::{CooMatrix, CsrMatrix};

use crate::cg::{mul, pcg, CgSettings};
use crate::error::{invalid, Result};
use crate::mesh::{Mesh, Point};

/// A coefficient that is either constant or given per triangle.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Constant(f64),
    PerElement(Vec<f64>),
}

impl Field {
    pub fn at(&self, element: usize) -> f64 {
        match self {
            Field::Constant(v) => *v,
            Field::PerElement(v) => v[element],
        }
    }

    fn check(&self, name: &str, n_elements: usize) -> Result<()> {
        let values: &[f64] = match self {
            Field::Constant(v) => std::slice::from_ref(v),
            Field::PerElement(v) if v.len() != n_elements => {
                return Err(invalid(format!(
                    "{name} has {} values for {n_elements} triangles",
                    v.len()
                )))
            }
            Field::PerElement(v) => v,
        };
        match values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            Some(k) => Err(invalid(format!(
                "{name} must be positive, got {} on entry {k}",
                values[k]
            ))),
            None => Ok(()),
        }
    }
}

/// Diffusion `D`, absorption `μ_a` and the Robin constant `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub diffusion: Field,
    pub absorption: Field,
    pub robin_a: f64,
}

impl Coefficients {
    pub fn constant(diffusion: f64, absorption: f64, robin_a: f64) -> Self {
        Self {
            diffusion: Field::Constant(diffusion),
            absorption: Field::Constant(absorption),
            robin_a,
        }
    }

    /// Tissue-like optics: `μ_a = 0.04`, `μ'_s = 1.5`, `D = 1/(3(μ_a + μ'_s))`,
    /// `A = 3.2`.
    pub fn tissue() -> Self {
        let (mu_a, mu_s) = (0.04, 1.5);
        Self::constant(1.0 / (3.0 * (mu_a + mu_s)), mu_a, 3.2)
    }

    pub fn validate(&self, mesh: &Mesh) -> Result<()> {
        self.diffusion.check("diffusion", mesh.n_triangles())?;
        self.absorption.check("absorption", mesh.n_triangles())?;
        if !(self.robin_a.is_finite() && self.robin_a > 0.0) {
            return Err(invalid(format!(
                "Robin constant must be positive, got {}",
                self.robin_a
            )));
        }
        Ok(())
    }
}

/// `∫ D ∇φ_a · ∇φ_b` on one triangle.
pub fn element_stiffness(p: [Point; 3], d: f64) -> [[f64; 3]; 3] {
    let twice_area = crate::mesh::cross(p[0], p[1], p[2]);
    // Gradients of the barycentric coordinates, scaled by twice the area.
    let g: [[f64; 2]; 3] = std::array::from_fn(|i| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        [p[j][1] - p[k][1], p[k][0] - p[j][0]]
    });
    let scale = d / (2.0 * twice_area);
    std::array::from_fn(|a| {
        std::array::from_fn(|b| scale * (g[a][0] * g[b][0] + g[a][1] * g[b][1]))
    })
}

/// `∫ μ φ_a φ_b` on one triangle.
pub fn element_mass(p: [Point; 3], mu: f64) -> [[f64; 3]; 3] {
    let area = 0.5 * crate::mesh::cross(p[0], p[1], p[2]);
    std::array::from_fn(|a| {
        std::array::from_fn(|b| mu * area / 12.0 * if a == b { 2.0 } else { 1.0 })
    })
}

/// `∫ φ_a φ_b ds` on one boundary edge of length `len`.
pub fn edge_mass(len: f64) -> [[f64; 2]; 2] {
    [[len / 3.0, len / 6.0], [len / 6.0, len / 3.0]]
}

/// Assembled matrices on one mesh.
#[derive(Debug, Clone)]
pub struct FemSystem {
    mesh: Mesh,
    coefficients: Coefficients,
    stiffness: CsrMatrix<f64>,
    mass: CsrMatrix<f64>,
    plain_mass: CsrMatrix<f64>,
    system: CsrMatrix<f64>,
    boundary_mass: CsrMatrix<f64>,
    robin: CsrMatrix<f64>,
    source_coupling: CsrMatrix<f64>,
    omega0_mass: CsrMatrix<f64>,
    interior: Vec<usize>,
    interior_block: CsrMatrix<f64>,
    cg: CgSettings,
}

fn push_block<const N: usize>(
    coo: &mut CooMatrix<f64>,
    idx: [usize; N],
    block: &[[f64; N]; N],
    scale: f64,
) {
    for a in 0..N {
        for b in 0..N {
            coo.push(idx[a], idx[b], scale * block[a][b]);
        }
    }
}

/// Rows `rows` and columns `cols` of `a` (index maps give new positions).
fn select(
    a: &CsrMatrix<f64>,
    rows: &[Option<usize>],
    cols: &[Option<usize>],
    shape: (usize, usize),
) -> CsrMatrix<f64> {
    let mut coo = CooMatrix::new(shape.0, shape.1);
    for (i, j, v) in a.triplet_iter() {
        if let (Some(r), Some(c)) = (rows[i], cols[j]) {
            coo.push(r, c, *v);
        }
    }
    CsrMatrix::from(&coo)
}

fn positions(n: usize, subset: &[usize]) -> Vec<Option<usize>> {
    let mut pos = vec![None; n];
    for (k, &i) in subset.iter().enumerate() {
        pos[i] = Some(k);
    }
    pos
}

impl FemSystem {
    pub fn assemble(mesh: Mesh, coefficients: Coefficients) -> Result<Self> {
        coefficients.validate(&mesh)?;
        let n = mesh.n_nodes();
        let mut s = CooMatrix::new(n, n);
        let mut m = CooMatrix::new(n, n);
        let mut c = CooMatrix::new(n, n);
        let mut c_omega = CooMatrix::new(n, n);
        let mut in_omega = vec![false; mesh.n_triangles()];
        for &k in mesh.omega0_elements() {
            in_omega[k] = true;
        }
        for (k, t) in mesh.triangles().iter().enumerate() {
            let p = mesh.vertices(k);
            push_block(
                &mut s,
                *t,
                &element_stiffness(p, coefficients.diffusion.at(k)),
                1.0,
            );
            let unit = element_mass(p, 1.0);
            push_block(&mut m, *t, &unit, coefficients.absorption.at(k));
            push_block(&mut c, *t, &unit, 1.0);
            if in_omega[k] {
                push_block(&mut c_omega, *t, &unit, 1.0);
            }
        }
        let mut bm = CooMatrix::new(n, n);
        for e in mesh.boundary_edges() {
            let (a, b) = (mesh.nodes()[e[0]], mesh.nodes()[e[1]]);
            push_block(
                &mut bm,
                *e,
                &edge_mass((a[0] - b[0]).hypot(a[1] - b[1])),
                1.0,
            );
        }
        let stiffness = CsrMatrix::from(&s);
        let mass = CsrMatrix::from(&m);
        let boundary_mass = CsrMatrix::from(&bm);
        let system = &stiffness + &mass;
        let robin = &system + &(&boundary_mass * (0.5 / coefficients.robin_a));

        let c_omega = CsrMatrix::from(&c_omega);
        let all: Vec<Option<usize>> = (0..n).map(Some).collect();
        let omega_pos = positions(n, mesh.omega0_nodes());
        let n0 = mesh.omega0_nodes().len();
        let source_coupling = select(&c_omega, &all, &omega_pos, (n, n0));
        let omega0_mass = select(&c_omega, &omega_pos, &omega_pos, (n0, n0));

        let mut is_boundary = vec![false; n];
        for &b in mesh.boundary_nodes() {
            is_boundary[b] = true;
        }
        let interior: Vec<usize> = (0..n).filter(|&i| !is_boundary[i]).collect();
        let interior_pos = positions(n, &interior);
        let interior_block = select(
            &system,
            &interior_pos,
            &interior_pos,
            (interior.len(), interior.len()),
        );

        Ok(Self {
            mesh,
            coefficients,
            stiffness,
            mass,
            plain_mass: CsrMatrix::from(&c),
            system,
            boundary_mass,
            robin,
            source_coupling,
            omega0_mass,
            interior,
            interior_block,
            cg: CgSettings::default(),
        })
    }

    pub fn with_cg_settings(mut self, cg: CgSettings) -> Self {
        self.cg = cg;
        self
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coefficients
    }

    /// `S`.
    pub fn stiffness(&self) -> &CsrMatrix<f64> {
        &self.stiffness
    }

    /// `M`, weighted by `μ_a`.
    pub fn mass(&self) -> &CsrMatrix<f64> {
        &self.mass
    }

    /// `C`, the unweighted mass matrix.
    pub fn plain_mass(&self) -> &CsrMatrix<f64> {
        &self.plain_mass
    }

    /// `L = S + M`.
    pub fn system(&self) -> &CsrMatrix<f64> {
        &self.system
    }

    pub fn boundary_mass(&self) -> &CsrMatrix<f64> {
        &self.boundary_mass
    }

    /// `M0`: nodal load of a source given on the `Ω₀` nodes.
    pub fn source_coupling(&self) -> &CsrMatrix<f64> {
        &self.source_coupling
    }

    /// `C0`: mass matrix of `Ω₀` on its own nodes.
    pub fn omega0_mass(&self) -> &CsrMatrix<f64> {
        &self.omega0_mass
    }

    pub fn n_nodes(&self) -> usize {
        self.mesh.n_nodes()
    }

    pub fn n_source(&self) -> usize {
        self.mesh.omega0_nodes().len()
    }

    pub fn n_boundary(&self) -> usize {
        self.mesh.boundary_nodes().len()
    }

    fn check(&self, what: &str, v: &[f64], n: usize) -> Result<()> {
        if v.len() == n {
            Ok(())
        } else {
            Err(invalid(format!(
                "{what}: expected length {n}, found {}",
                v.len()
            )))
        }
    }

    /// Nodal vector that is `values` on the boundary nodes and zero inside.
    pub fn extend_boundary(&self, values: &[f64]) -> Result<Vec<f64>> {
        self.check("boundary values", values, self.n_boundary())?;
        let mut out = vec![0.0; self.n_nodes()];
        for (&b, v) in self.mesh.boundary_nodes().iter().zip(values) {
            out[b] = *v;
        }
        Ok(out)
    }

    pub fn restrict_boundary(&self, nodal: &[f64]) -> Vec<f64> {
        self.mesh
            .boundary_nodes()
            .iter()
            .map(|&b| nodal[b])
            .collect()
    }

    /// Nodal vector that is `values` on the `Ω₀` nodes and zero elsewhere.
    pub fn extend_source(&self, values: &[f64]) -> Result<Vec<f64>> {
        self.check("source values", values, self.n_source())?;
        let mut out = vec![0.0; self.n_nodes()];
        for (&i, v) in self.mesh.omega0_nodes().iter().zip(values) {
            out[i] = *v;
        }
        Ok(out)
    }

    pub fn restrict_source(&self, nodal: &[f64]) -> Vec<f64> {
        self.mesh.omega0_nodes().iter().map(|&i| nodal[i]).collect()
    }

    /// `M0 f`.
    pub fn source_load(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check("source", f, self.n_source())?;
        Ok(mul(&self.source_coupling, f))
    }

    /// `z_j = ∫_Γ g₂ φ_j ds` for nodal boundary values `g2`.
    pub fn boundary_load(&self, g2: &[f64]) -> Result<Vec<f64>> {
        Ok(mul(&self.boundary_mass, &self.extend_boundary(g2)?))
    }

    /// Solves `L u = rhs` inside with `u = g1` on `Γ` (zero when `None`).
    pub fn dirichlet_solve(&self, rhs: &[f64], g1: Option<&[f64]>) -> Result<Vec<f64>> {
        let mut guess = vec![0.0; self.interior.len()];
        self.dirichlet_solve_warm(rhs, g1, &mut guess)
    }

    /// As [`Self::dirichlet_solve`], starting CG from the interior values in
    /// `guess` and leaving the solution's interior values there.
    pub fn dirichlet_solve_warm(
        &self,
        rhs: &[f64],
        g1: Option<&[f64]>,
        guess: &mut [f64],
    ) -> Result<Vec<f64>> {
        self.check("load", rhs, self.n_nodes())?;
        self.check("interior guess", guess, self.interior.len())?;
        let mut u = match g1 {
            Some(g) => self.extend_boundary(g)?,
            None => vec![0.0; self.n_nodes()],
        };
        let lifted = g1.map(|_| mul(&self.system, &u));
        let b: Vec<f64> = self
            .interior
            .iter()
            .map(|&i| rhs[i] - lifted.as_ref().map_or(0.0, |l| l[i]))
            .collect();
        pcg(&self.interior_block, &b, guess, self.cg)?;
        for (&i, v) in self.interior.iter().zip(guess.iter()) {
            u[i] = *v;
        }
        Ok(u)
    }

    /// Solves `L u = rhs` on all nodes (natural boundary condition).
    pub fn neumann_solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let mut u = vec![0.0; rhs.len()];
        self.neumann_solve_warm(rhs, &mut u)?;
        Ok(u)
    }

    /// Solves `L u = rhs` in place, starting CG from `u`.
    pub fn neumann_solve_warm(&self, rhs: &[f64], u: &mut [f64]) -> Result<()> {
        self.check("load", rhs, self.n_nodes())?;
        self.check("guess", u, self.n_nodes())?;
        pcg(&self.system, rhs, u, self.cg)?;
        Ok(())
    }

    pub fn n_interior(&self) -> usize {
        self.interior.len()
    }

    /// `L u_D = M0 f`, `u_D = g₁` on `Γ`.
    pub fn solve_dirichlet(&self, f: &[f64], g1: &[f64]) -> Result<Vec<f64>> {
        self.dirichlet_solve(&self.source_load(f)?, Some(g1))
    }

    /// `L u_N = M0 f + z(g₂)`.
    pub fn solve_neumann(&self, f: &[f64], g2: &[f64]) -> Result<Vec<f64>> {
        let mut rhs = self.source_load(f)?;
        rhs.iter_mut()
            .zip(self.boundary_load(g2)?)
            .for_each(|(r, z)| *r += z);
        self.neumann_solve(&rhs)
    }

    /// Forward model with the Robin condition `u + 2AD ∂_ν u = g⁻` for a
    /// constant ambient level `g_minus`.
    pub fn solve_robin(&self, f: &[f64], g_minus: f64) -> Result<Vec<f64>> {
        let mut rhs = self.source_load(f)?;
        if g_minus != 0.0 {
            let ambient = self.boundary_load(&vec![g_minus; self.n_boundary()])?;
            let w = 0.5 / self.coefficients.robin_a;
            rhs.iter_mut().zip(ambient).for_each(|(r, z)| *r += w * z);
        }
        let mut u = vec![0.0; rhs.len()];
        pcg(&self.robin, &rhs, &mut u, self.cg)?;
        Ok(u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::disk_mesh;

    const REF: [Point; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

    #[test]
    fn reference_triangle_stiffness() {
        let k = element_stiffness(REF, 1.0);
        let want = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for a in 0..3 {
            for b in 0..3 {
                assert!((k[a][b] - want[a][b]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn reference_triangle_mass() {
        let m = element_mass(REF, 1.0);
        for (a, row) in m.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                let want = if a == b { 2.0 / 24.0 } else { 1.0 / 24.0 };
                assert!((v - want).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn mass_sums_to_area() {
        let mesh = disk_mesh(1).unwrap();
        let area = mesh.total_area();
        let sys = FemSystem::assemble(mesh, Coefficients::constant(1.0, 1.0, 1.0)).unwrap();
        let total: f64 = sys.plain_mass().values().iter().sum();
        assert!((total - area).abs() < 1e-12);
        let perimeter: f64 = sys.boundary_mass().values().iter().sum();
        assert!(perimeter > 6.2 && perimeter < 2.0 * std::f64::consts::PI);
    }

    #[test]
    fn rejects_bad_coefficients() {
        let mesh = disk_mesh(0).unwrap();
        assert!(FemSystem::assemble(mesh.clone(), Coefficients::constant(0.0, 1.0, 1.0)).is_err());
        let c = Coefficients {
            diffusion: Field::PerElement(vec![1.0; 3]),
            absorption: Field::Constant(1.0),
            robin_a: 1.0,
        };
        assert!(FemSystem::assemble(mesh, c).is_err());
    }

    #[test]
    fn constants_are_reproduced() {
        let mesh = disk_mesh(1).unwrap();
        let sys = FemSystem::assemble(mesh, Coefficients::constant(1.0, 1.0, 1.0)).unwrap();
        let f = vec![1.0; sys.n_source()];
        let ud = sys
            .solve_dirichlet(&f, &vec![1.0; sys.n_boundary()])
            .unwrap();
        let un = sys.solve_neumann(&f, &vec![0.0; sys.n_boundary()]).unwrap();
        assert!(ud.iter().chain(&un).all(|v| (v - 1.0).abs() < 1e-9));
        let zero = sys
            .solve_dirichlet(&vec![0.0; sys.n_source()], &vec![0.0; sys.n_boundary()])
            .unwrap();
        assert!(zero.iter().all(|v| *v == 0.0));
    }
}
