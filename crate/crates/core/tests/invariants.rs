//! Property tests for structural invariants of the discretization and solvers.

use magtube::eigsolve::{dense_eigenvalues, lowest_eigs, Mode, SeparablePreconditioner, SolveRequest};
use magtube::experiments::bump;
use magtube::fields::{landau_gauge, make_field, mirror_gauge, GaugeChoice};
use magtube::geometry::{build_curve, CrossSection, CurveSpec, Profile, TubeLocator};
use magtube::grid::{Grid, GridAxis};
use magtube::linalg::{hermiticity_defect, LinearOperator};
use magtube::operators::{assemble_h3d, lambda1_disk, lowest_lattice_eigs, LatticeOperator, PRECOND_SHIFT};
use magtube::potential::Potential2D;
use magtube::scenario::parse_scenario_str;
use proptest::prelude::*;
use std::sync::Arc;

fn straight_locator() -> TubeLocator {
    TubeLocator::new(Arc::new(build_curve(&CurveSpec::new(Profile::Straight)).unwrap()), CrossSection::Disk { radius: 1.0 })
}

fn bent_locator(amplitude: f64) -> TubeLocator {
    let frame = build_curve(&CurveSpec::new(Profile::Bump { amplitude, half_width: 1.0 })).unwrap();
    TubeLocator::new(Arc::new(frame), CrossSection::Disk { radius: 0.8 })
}

fn lattice(n: [usize; 3]) -> Grid {
    Grid::new(vec![
        GridAxis::new(-2.0, 2.0, n[0]).unwrap(),
        GridAxis::new(-2.0, 2.0, n[1]).unwrap(),
        GridAxis::new(-3.0, 3.0, n[2]).unwrap(),
    ])
    .unwrap()
}

fn operator(loc: &TubeLocator, b0: [f64; 3], s0: f64, gauge: GaugeChoice, grid: &Grid) -> LatticeOperator {
    let field = make_field(b0, s0).unwrap();
    assemble_h3d(loc, &Potential2D::Well { depth: 6.0 }, &field, gauge, grid, 2).unwrap()
}

fn b0_strategy() -> impl Strategy<Value = [f64; 3]> {
    [-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn assembled_operators_are_hermitian(b0 in b0_strategy(), s0 in 0.6..1.5f64, mirror in any::<bool>(), amp in 0.0..0.4f64) {
        let gauge = if mirror { GaugeChoice::Mirror } else { GaugeChoice::Landau };
        let op = operator(&bent_locator(amp), b0, s0, gauge, &lattice([7, 8, 11]));
        prop_assert!(hermiticity_defect(&op, 6, 5) < 1e-13);
        let d = op.to_csr().to_dense();
        let defect = (&d - d.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(defect < 1e-13, "{defect}");
    }

    #[test]
    fn spectrum_is_gauge_invariant(b0 in b0_strategy(), s0 in 0.6..1.2f64) {
        let loc = straight_locator();
        let grid = lattice([7, 7, 13]);
        let a = dense_eigenvalues(&operator(&loc, b0, s0, GaugeChoice::Landau, &grid)).unwrap();
        let b = dense_eigenvalues(&operator(&loc, b0, s0, GaugeChoice::Mirror, &grid)).unwrap();
        for (x, y) in a.iter().zip(&b).take(10) {
            prop_assert!((x - y).abs() <= 1e-8 * (1.0 + x.abs()), "{x} vs {y}");
        }
    }

    #[test]
    fn magnetic_field_raises_the_ground_energy(b0 in b0_strategy(), s0 in 0.6..1.5f64) {
        // lattice diamagnetic inequality: unimodular link phases can only raise the form
        let loc = straight_locator();
        let grid = lattice([7, 7, 11]);
        let free = dense_eigenvalues(&operator(&loc, [0.0; 3], s0, GaugeChoice::Landau, &grid)).unwrap()[0];
        let mag = dense_eigenvalues(&operator(&loc, b0, s0, GaugeChoice::Landau, &grid)).unwrap()[0];
        prop_assert!(mag >= free - 1e-10, "{mag} < {free}");
    }

    #[test]
    fn gauges_vanish_on_their_half_spaces(b0 in b0_strategy(), s0 in 0.5..2.0f64, x1 in -5.0..5.0f64, x2 in -5.0..5.0f64, t in 0.0..3.0f64) {
        let field = make_field(b0, s0).unwrap();
        let z = 2.0 * s0 * (1.0 + 1e-9) + t;
        prop_assert_eq!(landau_gauge(&field, [x1, x2, z]).unwrap(), [0.0; 3]);
        prop_assert_eq!(mirror_gauge(&field, [x1, x2, -z]).unwrap(), [0.0; 3]);
    }

    #[test]
    fn field_is_supported_in_the_double_ball(b0 in b0_strategy(), s0 in 0.5..2.0f64, dir in [-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64], r in 0.0..6.0f64) {
        let field = make_field(b0, s0).unwrap();
        let n = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt().max(1e-6);
        let x = [dir[0] / n * r, dir[1] / n * r, dir[2] / n * r];
        let b = field.b(x);
        if r <= s0 {
            prop_assert_eq!(b, b0);
        }
        if r >= 1.8 * s0 {
            prop_assert_eq!(b, [0.0; 3]);
        }
        prop_assert!(field.divergence_fd(x, 1e-4).abs() < 1e-5 * (1.0 + field.b0_norm()));
    }

    #[test]
    fn disk_scaling_identity(b in 1.0..120.0f64, r in 0.6..1.6f64) {
        let direct = lambda1_disk(b, r, 600).unwrap().lambda;
        let scaled = lambda1_disk(r * r * b, 1.0, 600).unwrap().lambda / (r * r);
        prop_assert!(((direct - scaled) / direct).abs() < 1e-9, "{direct} {scaled}");
    }

    #[test]
    fn frames_stay_orthonormal_and_unit_speed(amp in -0.8..0.8f64, d in 0.5..3.0f64, g in 0.1..0.9f64, zig in any::<bool>()) {
        let profile = if zig {
            Profile::Zigzag { gamma_max: g, half_width: d, transition: 0.1 }
        } else {
            Profile::Bump { amplitude: amp, half_width: d }
        };
        let frame = build_curve(&CurveSpec::new(profile)).unwrap();
        // integration error of the frame grows with the curvature rate; the
        // sharpest zigzag transitions sampled here span about five steps
        prop_assert!(frame.orthonormality_defect() < 1e-7, "{}", frame.orthonormality_defect());
        // a chord falls short of its arc by κ²ds²/24
        let kappa = frame.curvature.iter().map(|k| k.abs()).fold(0.0, f64::max);
        let chord = kappa * kappa * frame.ds * frame.ds / 24.0;
        prop_assert!(frame.speed_defect() <= 1.05 * chord + 1e-9, "{} vs {chord}", frame.speed_defect());
    }

    #[test]
    fn scenario_dump_roundtrips(h in 0.05..0.5f64, depth in 1.0..20.0f64, s0 in 1.0..4.0f64, seed in 0u64..1000) {
        let text = format!(
            "seed = {seed}\n[potential]\ndepth = {depth}\n[fields]\ns0 = {s0}\n[grid]\nh = {h}\n[experiments]\nrun = [\"bracketing\", \"threshold\"]\n"
        );
        let sc = parse_scenario_str(&text).unwrap();
        let again = parse_scenario_str(&sc.dump().unwrap()).unwrap();
        prop_assert_eq!(sc.hash(), again.hash());
    }

    #[test]
    fn bump_is_a_smooth_unit_peak(t in -1.0..4.0f64) {
        let v = bump(t);
        prop_assert!((0.0..=1.0).contains(&v));
        if !(1.0..2.0).contains(&t) {
            prop_assert_eq!(v, 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 4, ..ProptestConfig::default() })]

    #[test]
    fn iterative_and_dense_spectra_agree(b0 in b0_strategy(), amp in 0.0..0.4f64, seed in 0u64..1000) {
        let grid = lattice([9, 9, 15]);
        let op = operator(&bent_locator(amp), b0, 1.0, GaugeChoice::Landau, &grid);
        let dense = dense_eigenvalues(&op).unwrap();
        let pc = SeparablePreconditioner::new(&grid.axis_specs(), PRECOND_SHIFT);
        let rep = lowest_eigs(&SolveRequest::new(&op, 3).tol(1e-9).seed(seed).mode(Mode::Lobpcg).precond(&pc)).unwrap();
        for j in 0..3 {
            prop_assert!((rep.eigenvalues[j] - dense[j]).abs() <= 1e-10 * (1.0 + dense[j].abs()), "{j}: {} vs {}", rep.eigenvalues[j], dense[j]);
        }
    }

    #[test]
    fn solves_are_deterministic(b0 in b0_strategy(), seed in 0u64..1000) {
        let grid = lattice([11, 11, 15]);
        let op = operator(&straight_locator(), b0, 1.0, GaugeChoice::Landau, &grid);
        prop_assert!(op.dim() > 1200);
        let a = lowest_lattice_eigs(&op, 2, 1e-8, seed, None).unwrap();
        let b = lowest_lattice_eigs(&op, 2, 1e-8, seed, None).unwrap();
        prop_assert_eq!(a.eigenvalues.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), b.eigenvalues.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        prop_assert_eq!(&a.vectors, &b.vectors);
        for r in &a.residuals {
            prop_assert!(*r <= 1e-8);
        }
    }
}
