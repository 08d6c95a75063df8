//! Fixtures shared by the criterion benches.

use hypercurv::surface::shapes::{icosphere, torus};
use hypercurv::{sample, sample_mesh, Orientation, SampleSet, Square, SurfaceSource};

/// Deterministic symmetric matrix with a spread spectrum.
pub fn shape_operator(n: usize) -> Square {
    let mut a = Square::zeros(n);
    for i in 0..n {
        for j in i..n {
            let v = ((i * 7 + j * 3 + 1) as f64).sin() + if i == j { i as f64 } else { 0.0 };
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
    a
}

pub fn curvature_values(n: usize) -> Vec<f64> {
    (0..n).map(|i| ((i + 1) as f64 * 0.7).cos() * 2.0).collect()
}

pub fn torus_source() -> SurfaceSource {
    torus(2.0, 0.5, Orientation::Outward).expect("valid torus")
}

pub fn torus_samples(resolution: usize) -> SampleSet {
    sample(&torus_source(), resolution).expect("torus samples")
}

pub fn icosphere_source(level: usize) -> SurfaceSource {
    SurfaceSource::mesh(icosphere(level, 1.0, [0.0; 3]), Orientation::Outward).expect("closed mesh")
}

pub fn icosphere_samples(level: usize) -> SampleSet {
    sample_mesh(&icosphere_source(level)).expect("icosphere samples")
}
