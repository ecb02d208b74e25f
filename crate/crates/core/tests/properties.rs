use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use emlab::brackets::{
    poisson_bracket, BracketOptions, CanonicalLattice, Coordinate, Hamiltonian, LatticeFunctional, Momentum,
    MomentumDivergence, Numerical,
};
use emlab::fields::{gradient, helmholtz_split, relative_spectral_divergence};
use emlab::snapshot::{read_binary, write_binary, Snapshot};
use emlab::{clebsch, dualmaxwell as dm, focksu2, majorana, propagator as pg, random};
use emlab::{GridSpec, ScalarFieldGrid, VectorFieldGrid};

fn small() -> GridSpec {
    GridSpec::new(8, 0.3).unwrap()
}

fn observable(kind: u8, mu: usize, point: usize) -> Box<dyn LatticeFunctional> {
    match kind % 4 {
        0 => Box::new(Coordinate { mu, point }),
        1 => Box::new(Momentum { mu, point }),
        2 => Box::new(MomentumDivergence { point }),
        _ => Box::new(Numerical(Hamiltonian)),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn brackets_are_antisymmetric(seed in any::<u64>(), k1 in 0u8..4, k2 in 0u8..4, mu in 0usize..4, nu in 0usize..4, p in 0usize..512, q in 0usize..512) {
        let s = CanonicalLattice::smooth_random(small(), &mut random::rng(seed), 2, 1.0);
        let opts = BracketOptions::default();
        let (f, g) = (observable(k1, mu, p), observable(k2, nu, q));
        let fg = poisson_bracket(f.as_ref(), g.as_ref(), &s, &opts).unwrap();
        let gf = poisson_bracket(g.as_ref(), f.as_ref(), &s, &opts).unwrap();
        prop_assert!((fg + gf).abs() <= 1e-9 * (1.0 + fg.abs()), "{fg} {gf}");
    }

    #[test]
    fn helmholtz_parts_reassemble(seed in any::<u64>(), modes in 1usize..4) {
        let f = random::smooth_vector(small(), &mut random::rng(seed), modes, 1.0).offset([0.3, -0.1, 0.2]);
        let parts = helmholtz_split(&f);
        prop_assert!(parts.reassemble().max_abs_diff(&f).unwrap() < 1e-12);
        prop_assert!(relative_spectral_divergence(&parts.transverse) < 1e-12);
    }

    #[test]
    fn evolution_is_a_group(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let m = pg::random_transverse(small(), &mut random::rng(seed), 3, 1.0);
        let two = pg::evolve(&pg::evolve(&m, a), b);
        let one = pg::evolve(&m, a + b);
        prop_assert!(two.max_abs_diff(&one) < 1e-12);
        prop_assert!((pg::energy(&two) - pg::energy(&m)).abs() <= 1e-12 * pg::energy(&m));
    }

    #[test]
    fn duality_rotation_inverts(seed in any::<u64>(), theta in -PI..PI) {
        let spec = small();
        let dt = 0.5 * dm::cfl_limit(&spec);
        let s = dm::StaggeredState::random_solenoidal(spec, dt, &mut random::rng(seed), 2, 1.0).unwrap();
        let (r, src) = dm::duality_rotate(&s, &dm::SourceSet::vacuum(), theta);
        let (back, _) = dm::duality_rotate(&r, &src, -theta);
        prop_assert!(back.max_abs_diff(&s) < 1e-14);
        prop_assert!((dm::energy(&r, &src) - dm::energy(&s, &src)).abs() < 1e-12 * dm::energy(&s, &src));
    }

    #[test]
    fn casimir_matches_d_n0(n_max in 4usize..10, frac in 0.0f64..1.0) {
        let space = focksu2::TwoModeSpace::new(n_max).unwrap();
        let n = ((n_max - 1) as f64 * frac).floor() as usize;
        let j = n as f64 / 2.0;
        prop_assert!((focksu2::casimir_on_subspace(space, n).unwrap() - j * (j + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn snapshot_round_trips(values in proptest::collection::vec(-1e300f64..1e300, 64 * 3), h in 1e-3f64..10.0) {
        let spec = GridSpec::with_c(4, h, 2.0).unwrap();
        let v: Vec<[f64; 3]> = values.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
        let s = Snapshot::Vector(VectorFieldGrid::from_values(spec, v).unwrap());
        let mut buf = Vec::new();
        write_binary(&mut buf, &s).unwrap();
        prop_assert_eq!(read_binary(&mut buf.as_slice()).unwrap(), s);
    }

    #[test]
    fn synthesis_is_linear_in_chi_and_phi(seed in any::<u64>(), a in -3.0f64..3.0) {
        let spec = small();
        let mut rng = random::rng(seed);
        let phi = random::smooth_scalar(spec, &mut rng, 2, 1.0);
        let psi = random::smooth_scalar(spec, &mut rng, 2, 1.0);
        let chi = random::smooth_scalar(spec, &mut rng, 2, 1.0);
        let zero = ScalarFieldGrid::zeros(spec);
        let base = clebsch::synthesize(&clebsch::ClebschTriple::new(phi.clone(), psi.clone(), chi.clone()).unwrap());
        let scaled = clebsch::synthesize(&clebsch::ClebschTriple::new(phi.map(|v| a * v), psi.clone(), chi.map(|v| a * v)).unwrap());
        prop_assert!(scaled.max_abs_diff(&base.scale(a)).unwrap() < 1e-12 * (1.0 + base.max_abs()));
        let only_chi = clebsch::synthesize(&clebsch::ClebschTriple::new(zero, psi, chi.clone()).unwrap());
        prop_assert!(only_chi.max_abs_diff(&gradient(&chi)).unwrap() == 0.0);
    }
}

/// A state with no mode paired with its opposite wavevector: only `k_x > 0`.
fn one_sided(spec: GridSpec, seed: u64) -> pg::SpectralModeSet {
    let full = pg::random_transverse(spec, &mut random::rng(seed), 3, 1.0);
    let mut m = pg::SpectralModeSet::zeros(spec);
    let waves = emlab::spectral::Wavevectors::new(spec);
    for idx in 0..spec.len() {
        if waves.is_resolved(idx) && waves.k(idx)[0] > 0.0 {
            for pol in 0..2 {
                m.set(idx, pol, full.amplitude(idx, pol)).unwrap();
            }
        }
    }
    m
}

#[test]
fn invariants_are_constant_for_one_sided_states() {
    let spec = GridSpec::new(16, 0.25).unwrap();
    let m = one_sided(spec, 21);
    let f0 = pg::synthesize(&m);
    let scale = f0.energy();
    let before = clebsch::field_invariants(&f0.e, &f0.h).unwrap();
    let f1 = pg::synthesize(&pg::evolve(&m, 0.037));
    let after = clebsch::field_invariants(&f1.e, &f1.h).unwrap();
    assert!((before.0 - after.0).abs() <= 1e-10 * scale && (before.1 - after.1).abs() <= 1e-10 * scale);

    // a standing wave trades (E² − H²) back and forth
    let standing = pg::plane_wave(spec, [1, 0, 0], [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]).unwrap();
    let mut both = standing.clone();
    let back = standing.mode_index([-1, 0, 0]);
    both.set(back, 0, Complex64::new(1.0, 0.0)).unwrap();
    let g0 = pg::synthesize(&both);
    let g1 = pg::synthesize(&pg::evolve(&both, 0.3));
    let s0 = clebsch::field_invariants(&g0.e, &g0.h).unwrap().0;
    let s1 = clebsch::field_invariants(&g1.e, &g1.h).unwrap().0;
    assert!((s0 - s1).abs() > 1e-3 * g0.energy());
}

#[test]
fn invariants_change_at_second_order_under_infinitesimal_maps() {
    let spec = GridSpec::new(8, 0.3).unwrap();
    let m = pg::random_transverse(spec, &mut random::rng(4), 2, 1.0);
    let f = pg::synthesize(&m);
    let (s0, p0) = clebsch::field_invariants(&f.e, &f.h).unwrap();
    let change = |eps: f64| {
        let r = majorana::to_rs(&f.e, &f.h).unwrap();
        let rotated = majorana::lorentz_infinitesimal(&r, [eps, -0.5 * eps, 0.3 * eps], [0.0; 3], 1.0);
        let (e, h) = majorana::from_rs(&rotated);
        let (s, p) = clebsch::field_invariants(&e, &h).unwrap();
        let (eb, hb): (Vec<_>, Vec<_>) = f
            .e
            .values()
            .iter()
            .zip(f.h.values())
            .map(|(e, h)| majorana::boost_fields(*e, *h, [0.2 * eps, eps, 0.0], 1.0))
            .unzip();
        let (sb, pb) = clebsch::field_invariants(
            &VectorFieldGrid::from_values(spec, eb).unwrap(),
            &VectorFieldGrid::from_values(spec, hb).unwrap(),
        )
        .unwrap();
        [(s - s0).abs(), (p - p0).abs(), (sb - s0).abs(), (pb - p0).abs()]
    };
    let (a, b) = (change(1e-3), change(5e-4));
    for i in 0..4 {
        // halving the parameter quarters the change
        assert!(b[i] < 0.3 * a[i] || a[i] < 1e-14, "{i}: {} {}", a[i], b[i]);
    }
}
