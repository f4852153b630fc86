use std::f64::consts::{FRAC_PI_4, PI};

use ndarray::Array2;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::fock::FockSpace;

fn random_hermitian(n: usize, support: usize, seed: u64) -> OperatorMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Array2::<C64>::zeros((n, n));
    for i in 0..support {
        for j in i..support {
            let z = if i == j {
                C64::new(rng.gen_range(0.0..1.0), 0.0)
            } else {
                C64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))
            };
            a[[i, j]] = z;
            a[[j, i]] = z.conj();
        }
    }
    let rho = OperatorMatrix::new(a).unwrap();
    let tr = rho.trace().re;
    rho.scale_real(1.0 / tr)
}

fn driven_params(family: Family, theta: f64, dim: usize) -> ModelParams {
    ModelParams {
        omega0: 1.1,
        gamma: 0.15,
        theta,
        n_th: 0.4,
        kerr: 0.2,
        drives: vec![DriveTone::linear(0.3, 1.3), DriveTone::two_photon(0.2, 2.2)],
        dim,
        family,
    }
}

fn setup(params: &ModelParams) -> (SystemOperators, DissipatorSpec, LiouvillianContext) {
    let ops = SystemOperators::build(params).unwrap();
    let spec = DissipatorSpec::from_params(params).unwrap();
    let ctx = LiouvillianContext::new(&ops, &spec);
    (ops, spec, ctx)
}

/// `L rho - L' rho` relative to the size of `L rho`.
fn rel_diff(a: &OperatorMatrix, b: &OperatorMatrix) -> f64 {
    a.max_abs_diff(b) / a.max_abs().max(1e-300)
}

#[test]
fn every_group_is_traceless_and_hermiticity_preserving() {
    let p = driven_params(Family::Gcl, 0.3 * PI, 14);
    let (ops, spec, ctx) = setup(&p);
    let rho = random_hermitian(14, 14, 1);
    for t in [0.0, 0.9, 2.3] {
        let h = ops.hamiltonian_at(t);
        for group in TermGroup::ALL {
            let out = apply_term(group, &ctx, &spec, &h, &rho, t).unwrap();
            assert!(out.trace().norm() < 1e-11, "{group:?} trace {}", out.trace());
            assert!(out.hermiticity_error() < 1e-11, "{group:?}");
        }
    }
}

#[test]
fn linear_in_rho() {
    let p = driven_params(Family::Gcl, 0.2 * PI, 10);
    let (ops, spec, ctx) = setup(&p);
    let (a, b) = (random_hermitian(10, 10, 2), random_hermitian(10, 10, 3));
    let (ca, cb) = (C64::new(0.7, 0.2), C64::new(-1.3, 0.5));
    let h = ops.hamiltonian_at(0.4);
    let combo = &a.scale(ca) + &b.scale(cb);
    let lhs = apply_liouvillian(&ctx, &spec, &h, &combo, 0.4).unwrap();
    let la = apply_liouvillian(&ctx, &spec, &h, &a, 0.4).unwrap();
    let lb = apply_liouvillian(&ctx, &spec, &h, &b, 0.4).unwrap();
    let rhs = &la.scale(ca) + &lb.scale(cb);
    assert!(lhs.max_abs_diff(&rhs) < 1e-12);
}

#[test]
fn dressing_vanishes_at_position_coupling() {
    let p = driven_params(Family::Gcl, 0.0, 12);
    let (ops, spec, ctx) = setup(&p);
    let rho = random_hermitian(12, 12, 4);
    let h = ops.hamiltonian_at(0.3);
    for group in [TermGroup::Nonlinear, TermGroup::Drive] {
        let out = apply_term(group, &ctx, &spec, &h, &rho, 0.3).unwrap();
        assert!(out.max_abs() < 1e-15, "{group:?}");
    }
}

#[test]
fn periodic_in_time() {
    let mut p = driven_params(Family::Gcl, 0.35 * PI, 12);
    p.drives.truncate(1);
    let (ops, spec, ctx) = setup(&p);
    let period = p.drives[0].period();
    let rho = random_hermitian(12, 12, 5);
    for t in [0.1, 1.9] {
        let a = apply_liouvillian(&ctx, &spec, &ops.hamiltonian_at(t), &rho, t).unwrap();
        let b = apply_liouvillian(&ctx, &spec, &ops.hamiltonian_at(t + period), &rho, t + period).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
    }
}

#[test]
fn cl_at_quarter_pi_is_lindblad() {
    let mut p = driven_params(Family::Cl, FRAC_PI_4, 16);
    let (ops, spec, ctx) = setup(&p);
    let rho = random_hermitian(16, 16, 6);
    let h = ops.hamiltonian_at(0.8);
    let cl = apply_liouvillian(&ctx, &spec, &h, &rho, 0.8).unwrap();
    let lb = lindblad_rhs(&h, &rho, &ops.x, &ops.p, p.gamma, p.omega0, p.c_t()).unwrap();
    assert!(cl.max_abs_diff(&lb) < 1e-12);

    p.family = Family::Lindblad;
    let (_, spec_l, ctx_l) = setup(&p);
    let via_family = apply_liouvillian(&ctx_l, &spec_l, &h, &rho, 0.8).unwrap();
    assert!(via_family.max_abs_diff(&lb) < 1e-12);
}

/// Standard thermal amplitude-damping form with rate `2 gamma`,
/// `kappa (n+1) D[a] + kappa n D[a†]`, written with ladder operators.
fn ladder_lindblad(space: &FockSpace, gamma: f64, n_th: f64, rho: &OperatorMatrix) -> OperatorMatrix {
    let a = space.annihilation();
    let ad = a.dagger();
    let d = |l: &OperatorMatrix, ld: &OperatorMatrix| {
        let jump = l.dot(rho).dot(ld);
        let ldl = ld.dot(l);
        &jump - &anticommutator(&ldl, rho).scale_real(0.5)
    };
    let kappa = 2.0 * gamma;
    &d(&a, &ad).scale_real(kappa * (n_th + 1.0)) + &d(&ad, &a).scale_real(kappa * n_th)
}

#[test]
fn lindblad_matches_ladder_form() {
    let (n, w0, g, n_th) = (14, 1.7, 0.12, 0.35);
    let space = FockSpace::new(n, w0).unwrap();
    // support below the last two levels keeps the truncation corner out
    let rho = random_hermitian(n, n - 2, 7);
    let zero = OperatorMatrix::zeros(n);
    let ours = lindblad_rhs(&zero, &rho, &space.x(), &space.p(), g, w0, 2.0 * n_th + 1.0).unwrap();
    let oracle = ladder_lindblad(&space, g, n_th, &rho);
    assert!(ours.max_abs_diff(&oracle) < 1e-12, "{}", ours.max_abs_diff(&oracle));
}

#[test]
fn thermal_state_is_fixed_point() {
    let (n, w0, g, n_th) = (30, 1.0, 0.2, 0.3);
    let p = ModelParams { omega0: w0, gamma: g, n_th, dim: n, family: Family::Lindblad, ..ModelParams::default() };
    let (ops, spec, ctx) = setup(&p);
    let gibbs = OperatorMatrix::from_real_fn(n, |i, j| {
        if i == j {
            n_th.powi(i as i32) / (1.0 + n_th).powi(i as i32 + 1)
        } else {
            0.0
        }
    });
    let out = apply_liouvillian(&ctx, &spec, &ops.h_static, &gibbs, 0.0).unwrap();
    assert!(out.max_abs() < 1e-9, "{}", out.max_abs());
}

#[test]
fn lindblad_requires_quarter_pi() {
    assert_eq!(DissipatorSpec::new(Family::Lindblad, 0.3, 0.1, 1.0).unwrap_err(), Error::LindbladAngle(0.3));
    assert!(DissipatorSpec::new(Family::Cl, 0.3, 0.1, 1.0).is_ok());
}

#[test]
fn no_coupling_leaves_von_neumann() {
    let mut p = driven_params(Family::Gcl, 0.3 * PI, 10);
    p.gamma = 0.0;
    let (ops, spec, ctx) = setup(&p);
    let rho = random_hermitian(10, 10, 8);
    let h = ops.hamiltonian_at(1.1);
    let out = apply_liouvillian(&ctx, &spec, &h, &rho, 1.1).unwrap();
    let vn = commutator(&h, &rho).scale(-I);
    assert!(out.max_abs_diff(&vn) < 1e-14);
}

#[test]
fn cl_drops_dressing_groups() {
    let p = driven_params(Family::Cl, 0.3 * PI, 10);
    let (ops, spec, ctx) = setup(&p);
    assert!(!spec.terms().nonlinear && !spec.terms().drive);
    let rho = random_hermitian(10, 10, 9);
    let h = ops.hamiltonian_at(0.2);
    let full = apply_liouvillian(&ctx, &spec, &h, &rho, 0.2).unwrap();
    let mut parts = OperatorMatrix::zeros(10);
    for g in [TermGroup::Unitary, TermGroup::Decoherence, TermGroup::Friction] {
        parts = &parts + &apply_term(g, &ctx, &spec, &h, &rho, 0.2).unwrap();
    }
    assert!(full.max_abs_diff(&parts) < 1e-14);
    // restriction cannot switch on a channel the family lacks
    let r = spec.restricted(TermGroups::ALL);
    assert!(!r.terms().nonlinear);
}

#[test]
fn squeeze_split_reassembles() {
    let theta = 0.1 * PI;
    let p = driven_params(Family::Gcl, theta, 12);
    let (_, spec, ctx) = setup(&p);
    let rho = random_hermitian(12, 12, 10);
    let dec = squeeze_decomposition(&ctx, &spec, &rho).unwrap();
    assert!(dec.lambda.hermiticity_error() < 1e-14);
    // the remainder carries only the (1 + sin 2θ) weight
    let w = (1.0 + (2.0 * theta).sin()) * p.gamma / 4.0;
    let oracle = &commutator(&ctx.x, &anticommutator(&ctx.p, &rho)).scale(-I * w)
        + &commutator(&ctx.p, &anticommutator(&ctx.x, &rho)).scale(I * w);
    assert!(dec.dissipative_part.max_abs_diff(&oracle) < 1e-13);
    let zero = OperatorMatrix::zeros(12);
    let total = apply_term(TermGroup::Friction, &ctx, &spec, &zero, &rho, 0.0).unwrap();
    assert!((&dec.hamiltonian_part + &dec.dissipative_part).max_abs_diff(&total) < 1e-14);
}

#[test]
fn analytic_v1_commutator_matches_direct() {
    let p = driven_params(Family::Gcl, 0.3 * PI, 24);
    let (_, _, ctx) = setup(&p);
    let space = FockSpace::new(24, p.omega0).unwrap();
    let v1 = space.poly_of_x(&p.kerr_coeffs());
    let direct = commutator(&v1, &ctx.p);
    let analytic = ctx.v1_commutator();
    for i in 0..20 {
        for j in 0..20 {
            assert!((direct.get(i, j) - analytic.get(i, j)).norm() < 1e-10);
        }
    }
}

#[test]
fn superoperator_matches_direct_application() {
    let p = driven_params(Family::Gcl, 0.27 * PI, 6);
    let (ops, spec, ctx) = setup(&p);
    let h = ops.hamiltonian_at(0.5);
    let sup = superoperator_matrix(&ctx, &spec, &h, 0.5).unwrap();
    let rho = random_hermitian(6, 6, 11);
    let v = Array2::from_shape_vec((36, 1), rho.as_array().iter().copied().collect()).unwrap();
    let lv = sup.dot(&v);
    let direct = apply_liouvillian(&ctx, &spec, &h, &rho, 0.5).unwrap();
    for (k, z) in direct.as_array().iter().enumerate() {
        assert!((lv[[k, 0]] - z).norm() < 1e-13);
    }
}

#[test]
fn kernel_matches_literal_route() {
    for (family, theta) in [(Family::Gcl, 0.37 * PI), (Family::Cl, 0.12 * PI), (Family::Lindblad, FRAC_PI_4)] {
        let mut p = driven_params(family, theta, 18);
        if family == Family::Lindblad {
            p.drives.truncate(1);
        }
        let (ops, spec, ctx) = setup(&p);
        let kernel = LiouvillianKernel::new(&ops, &spec).unwrap();
        let rho = random_hermitian(18, 18, 12);
        for t in [0.0, 0.77, 3.1] {
            let literal = apply_liouvillian(&ctx, &spec, &ops.hamiltonian_at(t), &rho, t).unwrap();
            let fast = kernel.apply(&rho, t).unwrap();
            assert!(rel_diff(&literal, &fast) < 1e-12, "{family} t={t}: {}", rel_diff(&literal, &fast));
        }
    }
}

#[test]
fn kernel_respects_restriction() {
    let p = driven_params(Family::Gcl, 0.4 * PI, 12);
    let (ops, spec, ctx) = setup(&p);
    let rho = random_hermitian(12, 12, 13);
    for group in TermGroup::ALL {
        let only = spec.restricted(TermGroups::only(group));
        let kernel = LiouvillianKernel::new(&ops, &only).unwrap();
        let t = 0.6;
        let literal = apply_term(group, &ctx, &only, &ops.hamiltonian_at(t), &rho, t).unwrap();
        let fast = kernel.apply(&rho, t).unwrap();
        assert!(literal.max_abs_diff(&fast) < 1e-12 * literal.max_abs().max(1.0), "{group:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trace_and_hermiticity_for_any_angle(theta in 0.0..FRAC_PI_2_F, dim in 4usize..12, seed in 0u64..1000, t in 0.0..10.0f64) {
        let p = driven_params(Family::Gcl, theta, dim);
        let (ops, spec, ctx) = setup(&p);
        let rho = random_hermitian(dim, dim, seed);
        let out = apply_liouvillian(&ctx, &spec, &ops.hamiltonian_at(t), &rho, t).unwrap();
        prop_assert!(out.trace().norm() < 1e-11);
        prop_assert!(out.hermiticity_error() < 1e-11);
    }
}

const FRAC_PI_2_F: f64 = std::f64::consts::FRAC_PI_2;
