use std::f64::consts::PI;
use std::sync::Arc;

use hypercurv::surface::shapes::{self, icosphere, Torus};
use hypercurv::surface::{Immersion, Jet};
use hypercurv::{
    integrate, minkowski_check, sample, sample_analytic, sample_mesh, support_function, Orientation, SampleSet,
    ScalarField, SurfaceSource, Tolerances,
};

/// Torus moved by a rotation about a tilted axis and a translation.
struct MovedTorus {
    base: Torus,
    q: [[f64; 3]; 3],
    t: [f64; 3],
}

impl MovedTorus {
    fn new(angle: f64, t: [f64; 3]) -> Self {
        // Rodrigues rotation about (1, 2, 2)/3
        let k = [1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0];
        let (s, c) = angle.sin_cos();
        let mut q = [[0.0; 3]; 3];
        let cross = [[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]];
        for i in 0..3 {
            for j in 0..3 {
                q[i][j] = c * f64::from(u8::from(i == j)) + s * cross[i][j] + (1.0 - c) * k[i] * k[j];
            }
        }
        Self {
            base: Torus::new(2.0, 0.5).unwrap(),
            q,
            t,
        }
    }

    fn rotate(&self, v: &mut [f64]) {
        let w = [v[0], v[1], v[2]];
        for i in 0..3 {
            v[i] = (0..3).map(|j| self.q[i][j] * w[j]).sum();
        }
    }
}

impl Immersion for MovedTorus {
    fn dim(&self) -> usize {
        2
    }

    fn domain(&self) -> Vec<(f64, f64)> {
        self.base.domain()
    }

    fn eval(&self, u: &[f64], jet: &mut Jet) {
        self.base.eval(u, jet);
        self.rotate(&mut jet.point);
        for k in 0..3 {
            jet.point[k] += self.t[k];
        }
        for i in 0..2 {
            self.rotate(jet.tangent_mut(i));
            for j in 0..2 {
                self.rotate(jet.second_mut(i, j));
            }
        }
    }

    fn name(&self) -> String {
        "moved-torus".into()
    }
}

fn origin_sphere(n: usize, r: f64, o: Orientation, res: usize) -> SampleSet {
    sample_analytic(&shapes::origin_sphere(n, r, o).unwrap(), res).unwrap()
}

fn integral_of(set: &SampleSet, values: Vec<f64>) -> f64 {
    integrate(set, &ScalarField::new("f", values)).unwrap()
}

#[test]
fn sphere_curvatures_match_closed_form() {
    for (n, r) in [(2usize, 1.0), (2, 2.0), (3, 1.5), (4, 0.7)] {
        let set = origin_sphere(n, r, Orientation::Outward, 10);
        let c = set.curvatures();
        for i in (0..set.len()).step_by(7) {
            for k in c.kappas(i) {
                assert!((k + 1.0 / r).abs() < 1e-12, "n={n} R={r}: {k}");
            }
            assert!((set.support(i) - r).abs() < 1e-12);
        }
        let area = set.total_area();
        // |S^n(R)| = 2 π^{(n+1)/2} R^n / Γ((n+1)/2)
        let want = match n {
            2 => 4.0 * PI * r * r,
            3 => 2.0 * PI * PI * r.powi(3),
            4 => 8.0 * PI * PI / 3.0 * r.powi(4),
            _ => unreachable!(),
        };
        assert!((area - want).abs() < 1e-11 * want, "n={n}: {area} vs {want}");
    }
}

#[test]
fn torus_curvatures_match_closed_form() {
    let (big, small) = (2.0, 0.5);
    let set = sample_analytic(&shapes::torus(big, small, Orientation::Outward).unwrap(), 24).unwrap();
    let c = set.curvatures();
    for i in 0..set.len() {
        let p = set.position(i);
        let w = (p[0] * p[0] + p[1] * p[1]).sqrt();
        let cos_v = (w - big) / small;
        let mut want = [-cos_v / (big + small * cos_v), -1.0 / small];
        want.sort_by(f64::total_cmp);
        let got = c.kappas(i);
        assert!((got[0] - want[0]).abs() < 1e-11 && (got[1] - want[1]).abs() < 1e-11);
    }
    assert!((set.total_area() - 4.0 * PI * PI * big * small).abs() < 1e-10);
}

#[test]
fn gauss_bonnet_on_smooth_shapes() {
    let ell = sample(&shapes::ellipsoid(vec![1.0, 1.5, 2.0], Orientation::Outward).unwrap(), 96).unwrap();
    let k = integral_of(&ell, ell.curvatures().s_values(2));
    assert!((k - 4.0 * PI).abs() < 1e-9, "ellipsoid total curvature {k}");

    // Gaussian curvature from the implicit closed form, as an oracle for S_2
    let (a, b, cc) = (1.0_f64, 1.5_f64, 2.0_f64);
    let c = ell.curvatures();
    for i in (0..ell.len()).step_by(101) {
        let p = ell.position(i);
        let q = p[0] * p[0] / a.powi(4) + p[1] * p[1] / b.powi(4) + p[2] * p[2] / cc.powi(4);
        let gauss = 1.0 / ((a * b * cc).powi(2) * q * q);
        assert!((c.s(i, 2) - gauss).abs() < 1e-10 * gauss);
    }

    let tor = sample_analytic(&shapes::torus(2.0, 0.5, Orientation::Outward).unwrap(), 64).unwrap();
    let k = integral_of(&tor, tor.curvatures().s_values(2));
    assert!(k.abs() < 1e-10, "torus total curvature {k}");
}

#[test]
fn orientation_reversal() {
    let src = shapes::torus(2.0, 0.5, Orientation::Outward).unwrap();
    let out = sample_analytic(&src, 24).unwrap();
    let inw = sample_analytic(&src.with_orientation(Orientation::Inward), 24).unwrap();
    let rev = out.reversed();
    let (a, b, c) = (out.curvatures(), inw.curvatures(), rev.curvatures());
    for i in 0..out.len() {
        assert!((out.support(i) + inw.support(i)).abs() < 1e-14);
        for r in 0..=2 {
            let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
            assert!((b.s(i, r) - sign * a.s(i, r)).abs() < 1e-12);
            assert!((c.s(i, r) - b.s(i, r)).abs() < 1e-12);
        }
    }
    let t = Tolerances::analytic();
    for r in 0..2 {
        let x = minkowski_check(&out, r, &t).unwrap();
        let y = minkowski_check(&inw, r, &t).unwrap();
        assert!((x.residual_abs - y.residual_abs).abs() < 1e-12);
    }
}

#[test]
fn rigid_motion_invariance() {
    let base = sample_analytic(&shapes::torus(2.0, 0.5, Orientation::Outward).unwrap(), 32).unwrap();
    let moved_src = SurfaceSource::analytic(
        Arc::new(MovedTorus::new(0.9, [0.3, -1.1, 0.7])),
        Orientation::Outward,
    )
    .unwrap();
    let moved = sample_analytic(&moved_src, 32).unwrap();
    let (a, b) = (base.curvatures(), moved.curvatures());
    for i in 0..base.len() {
        for r in 0..=2 {
            assert!((a.s(i, r) - b.s(i, r)).abs() < 1e-11);
        }
        assert!((base.weight(i) - moved.weight(i)).abs() < 1e-12);
    }
    let t = Tolerances::analytic();
    for r in 0..2 {
        let rep = minkowski_check(&moved, r, &t).unwrap();
        assert!(rep.is_pass(), "{rep:?}");
    }
    // ρ is not invariant, but ∫ H_1 ρ = -|M| is
    let h1rho: Vec<f64> = (0..moved.len()).map(|i| b.h(i, 1) * moved.support(i)).collect();
    assert!((integral_of(&moved, h1rho) + moved.total_area()).abs() < 1e-9);
}

#[test]
fn scaling_laws() {
    let base = origin_sphere(3, 1.0, Orientation::Outward, 8);
    for s in [0.5, 2.0, 3.0] {
        let scaled = origin_sphere(3, s, Orientation::Outward, 8);
        assert!((scaled.total_area() - s.powi(3) * base.total_area()).abs() < 1e-11 * scaled.total_area());
        for r in 0..=3 {
            let want = base.curvatures().h(0, r) / s.powi(r as i32);
            assert!((scaled.curvatures().h(0, r) - want).abs() < 1e-12);
        }
        let lambda = hypercurv::classify::lambda_fit(&scaled, &Tolerances::analytic());
        let got = match lambda.params["lambda"] {
            hypercurv::MetaValue::Real(v) => v,
            _ => unreachable!(),
        };
        assert!((got - (3.0 / s - s / 2.0)).abs() < 1e-10);
    }
}

#[test]
fn support_function_of_translated_sphere() {
    let c = vec![0.4, -0.2, 1.0];
    let set = sample_analytic(&shapes::sphere(2, 1.5, c.clone(), Orientation::Outward).unwrap(), 16).unwrap();
    let rho = support_function(&set);
    for i in 0..set.len() {
        let n = set.normal(i);
        let want = 1.5 + (0..3).map(|k| c[k] * n[k]).sum::<f64>();
        assert!((rho.values[i] - want).abs() < 1e-12);
    }
}

#[test]
fn sampling_is_independent_of_thread_count() {
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let set = sample(&shapes::ellipsoid(vec![1.0, 1.5, 2.0], Orientation::Outward).unwrap(), 40).unwrap();
            let t = Tolerances::analytic();
            let reps: Vec<f64> = (0..2).map(|r| minkowski_check(&set, r, &t).unwrap().residual_abs).collect();
            let mesh = sample_mesh(&SurfaceSource::mesh(icosphere(3, 1.0, [0.1, 0.0, 0.0]), Orientation::Outward).unwrap()).unwrap();
            let m = minkowski_check(&mesh, 1, &t).unwrap().residual_abs;
            (set.weights().to_vec(), set.curvatures().s_values(2), reps, m)
        })
    };
    let one = run(1);
    for threads in [2, 5] {
        let other = run(threads);
        assert_eq!(one.0.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), other.0.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        assert_eq!(one.1.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), other.1.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        assert_eq!(one.2.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), other.2.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        assert_eq!(one.3.to_bits(), other.3.to_bits());
    }
}

#[test]
fn icosphere_minkowski_converges() {
    let t = Tolerances::mesh();
    for r in 0..2 {
        let residuals: Vec<f64> = (3..=5)
            .map(|level| {
                let src = SurfaceSource::mesh(icosphere(level, 1.0, [0.0; 3]), Orientation::Outward).unwrap();
                minkowski_check(&sample_mesh(&src).unwrap(), r, &t).unwrap().residual_rel
            })
            .collect();
        assert!(residuals[0] > residuals[1] && residuals[1] > residuals[2], "r={r}: {residuals:?}");
        assert!(residuals[1] < 5e-2);
    }
}
