//! Quasi-Weierstrass form of the continuous and discretized microgrid.
//!
//! Run with `cargo run --example decompose`.

use inno_deepc::descriptor::{determinant_degree, discretize_foh, weierstrass_decompose, DEFAULT_DECOMPOSITION_TOL};
use inno_deepc::microgrid::{build_microgrid, MicrogridParams};

fn main() -> inno_deepc::Result<()> {
    let params = MicrogridParams::default();
    let cont = build_microgrid(&params)?;
    let wf = weierstrass_decompose(&cont, DEFAULT_DECOMPOSITION_TOL)?;
    println!("continuous: n_s = {}, n_f = {}, s = {}", wf.n_s, wf.n_f, wf.s);
    println!("  reassembly error {:.2e}", wf.reassembly_error(&cont.e, &cont.a));
    println!("  slow eigenvalues {:?}", wf.j.complex_eigenvalues().as_slice());

    let disc = discretize_foh(&cont, params.h)?;
    let dwf = weierstrass_decompose(&disc.system, DEFAULT_DECOMPOSITION_TOL)?;
    let deg = determinant_degree(&disc.system.e, &disc.system.a, 1.0, DEFAULT_DECOMPOSITION_TOL);
    println!("discrete (h = {} s): n_s = {}, n_f = {}, s = {}, deg det = {deg}", params.h, dwf.n_s, dwf.n_f, dwf.s);
    println!("  J eigenvalues {:?}", dwf.j.complex_eigenvalues().as_slice());
    println!("  nilpotent part N =\n{}", dwf.n);
    Ok(())
}
