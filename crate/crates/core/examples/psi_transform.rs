//! Splits a random field on the double cover into its components at `rho = -1, 1` and
//! checks the roundtrip and the splitting of the index form.
//!
//! `cargo run --release --example psi_transform`

use faer::c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use morse_sturm_index::bott::{psi_transform, upsilon_transform};
use morse_sturm_index::galerkin::{assemble, DiscreteField, Mesh};
use morse_sturm_index::linalg::CMat;
use morse_sturm_index::{generators, CirclePoint};

fn form(h: &CMat, v: &DiscreteField, w: &DiscreteField) -> c64 {
    let hv: Vec<c64> = (0..h.nrows()).map(|i| (0..h.ncols()).map(|j| h[(i, j)] * v.coeffs[j]).sum()).collect();
    w.coeffs.iter().zip(&hv).map(|(a, b)| a.conj() * b).sum()
}

fn main() -> morse_sturm_index::Result<()> {
    let sys = generators::random_tilted(4, 2)?;
    let (n_iter, m) = (2, 16);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut random = || {
        let mut f = DiscreteField::zeros(2, m * n_iter, n_iter, CirclePoint::ONE);
        f.coeffs.iter_mut().for_each(|c| *c = c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        f
    };
    let (v, w) = (random(), random());

    let (vp, wp) = (psi_transform(&sys, &v)?, psi_transform(&sys, &w)?);
    let back = upsilon_transform(&sys, &vp)?;
    let err = v.coeffs.iter().zip(&back.coeffs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    println!("roundtrip error {err:.2e}");

    let lhs = form(&assemble(&sys, n_iter, CirclePoint::ONE, Mesh::new(m * n_iter)?)?.h, &v, &w);
    let mut rhs = c64::new(0.0, 0.0);
    for (vk, wk) in vp.iter().zip(&wp) {
        rhs += form(&assemble(&sys, 1, vk.rho, Mesh::new(m)?)?.h, vk, wk);
        println!("component rho = {:+.3}{:+.3}i", vk.rho.rho().re, vk.rho.rho().im);
    }
    rhs *= (n_iter * n_iter) as f64;
    println!("I_2(V, W) = {lhs:.6}\nN^2 sum I_1(V_k, W_k) = {rhs:.6}");
    Ok(())
}
