//! Manufactured-solution convergence and assembly invariants.

use accreg_fem::cg::mul;
use accreg_fem::{disk_mesh, Coefficients, FemSystem, Mesh, Point};
use proptest::prelude::*;

// Harmonic, so with D = μ_a = 1 it solves −Δu + u = f for f = u.
fn exact(p: Point) -> f64 {
    p[0].cos() * p[1].exp()
}

fn grad(p: Point) -> [f64; 2] {
    [-p[0].sin() * p[1].exp(), p[0].cos() * p[1].exp()]
}

/// L² error of a P1 field against `exact`, edge-midpoint rule per triangle.
fn l2_error(mesh: &Mesh, u: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (k, t) in mesh.triangles().iter().enumerate() {
        let p = mesh.vertices(k);
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            let m = [0.5 * (p[a][0] + p[b][0]), 0.5 * (p[a][1] + p[b][1])];
            let e = 0.5 * (u[t[a]] + u[t[b]]) - exact(m);
            sum += mesh.area(k) / 3.0 * e * e;
        }
    }
    sum.sqrt()
}

fn system(level: u32) -> FemSystem {
    FemSystem::assemble(
        disk_mesh(level).unwrap(),
        Coefficients::constant(1.0, 1.0, 1.0),
    )
    .unwrap()
}

fn nodal(sys: &FemSystem, idx: &[usize], f: impl Fn(Point) -> f64) -> Vec<f64> {
    idx.iter().map(|&i| f(sys.mesh().nodes()[i])).collect()
}

fn fitted_order(h: &[f64], err: &[f64]) -> f64 {
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    let (mx, my) = (x.iter().sum::<f64>() / 4.0, y.iter().sum::<f64>() / 4.0);
    let num: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

#[test]
fn dirichlet_and_neumann_converge_at_second_order() {
    let (mut h, mut e_d, mut e_n) = (vec![], vec![], vec![]);
    for level in 1..=4 {
        let sys = system(level);
        let bnd = sys.mesh().boundary_nodes().to_vec();
        let f = nodal(&sys, sys.mesh().omega0_nodes(), exact);
        let g1 = nodal(&sys, &bnd, exact);
        // Boundary nodes sit on the unit circle, where ν = x.
        let g2 = nodal(&sys, &bnd, |p| {
            let g = grad(p);
            g[0] * p[0] + g[1] * p[1]
        });
        let ud = sys.solve_dirichlet(&f, &g1).unwrap();
        let un = sys.solve_neumann(&f, &g2).unwrap();
        h.push(sys.mesh().mesh_size());
        e_d.push(l2_error(sys.mesh(), &ud));
        e_n.push(l2_error(sys.mesh(), &un));
    }
    let (od, on) = (fitted_order(&h, &e_d), fitted_order(&h, &e_n));
    println!("h {h:?}\ndirichlet {e_d:?} order {od:.3}\nneumann {e_n:?} order {on:.3}");
    assert!((1.8..=2.2).contains(&od), "dirichlet order {od}");
    assert!((1.8..=2.2).contains(&on), "neumann order {on}");
}

#[test]
fn constants_are_reproduced() {
    let sys = system(2);
    let f = vec![2.5; sys.n_source()];
    let ud = sys
        .solve_dirichlet(&f, &vec![2.5; sys.n_boundary()])
        .unwrap();
    let un = sys.solve_neumann(&f, &vec![0.0; sys.n_boundary()]).unwrap();
    for u in [ud, un] {
        assert!(u.iter().all(|v| (v - 2.5).abs() < 1e-9));
    }
    let zero = sys
        .solve_dirichlet(&vec![0.0; sys.n_source()], &vec![0.0; sys.n_boundary()])
        .unwrap();
    assert!(zero.iter().all(|v| *v == 0.0));
}

#[test]
fn disk_area_converges() {
    let area = disk_mesh(3).unwrap().total_area();
    assert!((area - std::f64::consts::PI).abs() < 0.02 * std::f64::consts::PI);
}

fn jittered(level: u32, seed: &[f64]) -> Mesh {
    let base = disk_mesh(level).unwrap();
    // A quarter of the shortest edge cannot flip any triangle.
    let h = base
        .triangles()
        .iter()
        .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])])
        .map(|(a, b)| {
            let (p, q) = (base.nodes()[a], base.nodes()[b]);
            (p[0] - q[0]).hypot(p[1] - q[1])
        })
        .fold(f64::INFINITY, f64::min);
    let boundary = base.boundary_nodes();
    let nodes: Vec<Point> = base
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if boundary.binary_search(&i).is_ok() {
                return *p;
            }
            let a = seed[i % seed.len()] * std::f64::consts::TAU;
            [p[0] + 0.25 * h * a.cos(), p[1] + 0.25 * h * a.sin()]
        })
        .collect();
    Mesh::new(
        nodes,
        base.triangles().to_vec(),
        base.boundary_edges().to_vec(),
    )
    .unwrap()
}

fn max_asymmetry(m: &nalgebra_sparse::CsrMatrix<f64>) -> f64 {
    let t = m.transpose();
    m.triplet_iter()
        .map(|(i, j, v)| (v - t.get_entry(i, j).map_or(0.0, |e| e.into_value())).abs())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn assembled_matrices_are_symmetric_and_definite(
        seed in prop::collection::vec(0.0f64..1.0, 1..40),
        d in 0.1f64..3.0,
        mu in 0.01f64..2.0,
        x in prop::collection::vec(-1.0f64..1.0, 81..=81),
    ) {
        let sys = FemSystem::assemble(jittered(1, &seed), Coefficients::constant(d, mu, 3.2)).unwrap();
        for m in [sys.stiffness(), sys.mass(), sys.plain_mass(), sys.system()] {
            prop_assert!(max_asymmetry(m) <= 1e-12);
        }
        let n = sys.n_nodes();
        let v: Vec<f64> = (0..n).map(|i| x[i % x.len()] + 0.1 * i as f64 / n as f64).collect();
        let quad = |m| -> f64 { v.iter().zip(mul(m, &v)).map(|(a, b)| a * b).sum() };
        prop_assert!(quad(sys.stiffness()) >= -1e-12);
        prop_assert!(quad(sys.mass()) > 0.0);
        prop_assert!(quad(sys.plain_mass()) > 0.0);
        prop_assert!(quad(sys.system()) > 0.0);
        let s1 = mul(sys.stiffness(), &vec![1.0; n]);
        prop_assert!(s1.iter().all(|r| r.abs() <= 1e-12 * d));
        let area: f64 = mul(sys.plain_mass(), &vec![1.0; n]).iter().sum();
        prop_assert!((area - sys.mesh().total_area()).abs() <= 1e-12);
    }
}
