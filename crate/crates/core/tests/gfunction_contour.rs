//! Residue summation of g against direct numerical contour integration.

mod common;

use common::{contour_g, residue_g};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[test]
fn trapezoid_oracle_is_converged() {
    let betas = [0.3, -0.2, 0.9, -1.1];
    let coarse = contour_g(0, &betas, 0.1);
    let fine = contour_g(0, &betas, 0.05);
    assert!((coarse - fine).norm() < 1e-10 * fine.norm());
}

#[test]
fn residues_match_contour_quadrature_on_random_rapidities() {
    let mut rng = StdRng::seed_from_u64(20_240_917);
    let mut cases = vec![[0.3, -0.2, 0.9, -1.1]];
    while cases.len() < 7 {
        let b: [f64; 4] = std::array::from_fn(|_| rng.random_range(-3.0..3.0));
        let separated = (0..4).all(|j| (j + 1..4).all(|k| (b[j] - b[k]).abs() > 0.05));
        if separated {
            cases.push(b);
        }
    }
    cases.push([4.5, -0.4, 1.3, -3.9]);
    for betas in &cases {
        for ell in 0..4 {
            let r = residue_g(ell, betas);
            let c = contour_g(ell, betas, 0.05);
            let rel = (r - c).norm() / c.norm();
            assert!(rel < 1e-6, "β = {betas:?}, ℓ = {ell}: residue {r} vs contour {c} (rel {rel:.2e})");
        }
    }
}
