//! Dense QP with box bounds and general inequalities.
//!
//! Run with `cargo run --example box_qp`.

use inno_deepc::control::{kkt_residual, solve_box_qp, solve_qp};
use inno_deepc::linalg::{Mat, Vector};

fn main() -> inno_deepc::Result<()> {
    let h = Mat::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 2.0]);
    let f = Vector::from_vec(vec![-8.0, 3.0, -1.0]);
    let (lo, hi) = (Vector::from_element(3, -1.0), Vector::from_element(3, 1.0));
    let sol = solve_box_qp(&h, &f, Some(&lo), Some(&hi))?;
    println!("box QP: z = {:?}, active {:?}, iterations {}", sol.z.as_slice(), sol.active, sol.iterations);
    println!("  KKT residual {:.1e}", kkt_residual(&h, &f, Some(&lo), Some(&hi), &sol.z));

    // z1 + z2 + z3 >= 1 as a general row C z >= d.
    let c = Mat::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
    let sol = solve_qp(&h, &f, &c, &Vector::from_element(1, 1.0))?;
    println!("general QP: z = {:?}, multiplier {:?}", sol.z.as_slice(), sol.multipliers.as_slice());
    Ok(())
}
