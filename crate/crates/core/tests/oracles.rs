mod common;

use common::{disk_ground_kummer, radial_shooting_threshold};
use magtube::grid::Grid;
use magtube::operators::{assemble_hv, ground_state_2d, lambda1_disk};
use magtube::geometry::CrossSection;
use magtube::potential::Potential2D;

#[test]
fn shooting_oracle_is_converged_in_its_own_step_and_range() {
    let a = radial_shooting_threshold(10.0, 1.0, 10.0);
    let b = radial_shooting_threshold(10.0, 1.0, 14.0);
    assert!((a - b).abs() < 1e-9, "{a} {b}");
    assert!(a > -10.0 && a < 0.0);
}

#[test]
fn shallow_well_binds_weakly() {
    // in 2D any attractive well binds, with e → 0⁻ as the depth goes to zero
    let e = radial_shooting_threshold(0.5, 1.0, 60.0);
    assert!(e < 0.0 && e > -0.05, "{e}");
}

#[test]
fn lattice_threshold_converges_to_the_shooting_value() {
    let exact = radial_shooting_threshold(10.0, 1.0, 12.0);
    let sec = CrossSection::Disk { radius: 1.0 };
    let v = Potential2D::Well { depth: 10.0 };
    let mut errs = Vec::new();
    for h in [0.2, 0.1] {
        let hv = assemble_hv(&v, &sec, &Grid::square(8.0, h).unwrap(), 4).unwrap();
        let gs = ground_state_2d(&hv, 1.0, 1e-9, 3).unwrap();
        errs.push((gs.e - exact).abs());
    }
    assert!(errs[1] < 6e-3, "{errs:?}");
    assert!(errs[0] < 2e-2, "{errs:?}");
}

#[test]
fn disk_fibers_match_the_kummer_solution() {
    for (b, r) in [(1.0, 1.0), (10.0, 1.0), (40.0, 0.8), (20.0, 1.4)] {
        let exact = disk_ground_kummer(b, r);
        let got = lambda1_disk(b, r, 2000).unwrap().lambda;
        let rel = ((got - exact) / exact).abs();
        assert!(rel < 1e-5, "B = {b}, R = {r}: {got} vs {exact}");
    }
}

#[test]
fn kummer_oracle_weak_field_limit() {
    // for small B the ground state is the m = 0 perturbation of the constant
    // Neumann mode: λ ≈ B²R²/8
    let (b, r) = (0.05, 1.0);
    let exact = disk_ground_kummer(b, r);
    assert!((exact / (b * b * r * r / 8.0) - 1.0).abs() < 1e-2, "{exact}");
}

#[test]
fn sturm_fibers_match_certified_eigenvalues() {
    use magtube::operators::disk::fiber_matrix;
    for (b, r) in [(10.0, 0.8), (40.0, 1.0), (160.0, 1.4)] {
        let g = lambda1_disk(b, r, 2000).unwrap();
        let (d, e) = fiber_matrix(b, r, g.m, 2000);
        let c = common::certify_lowest_tridiag(&d, &e);
        let scale = 1.0 + c.rho.abs();
        let gap = c.dense[1] - c.dense_bound - c.rho;
        assert!(gap > c.residual, "B = {b}: not the lowest");
        assert!((c.rho - c.dense[0]).abs() <= c.dense_bound, "B = {b}: dense {} vs {}", c.dense[0], c.rho);
        let certified = c.residual * c.residual / gap;
        assert!(certified / scale < 1e-12, "B = {b}: residual {:e}", c.residual);
        let rel = (g.lambda - c.rho).abs() / scale;
        assert!(rel < 1e-10, "B = {b}: Sturm {} vs certified {} ({rel:e})", g.lambda, c.rho);
    }
}
