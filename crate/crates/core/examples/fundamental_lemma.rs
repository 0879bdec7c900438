//! Trajectory membership through the block-Hankel matrix of one noise-free
//! data set, and the data-based R-controllability test.
//!
//! Run with `cargo run --example fundamental_lemma`.

use inno_deepc::behavioral::{fl_membership, r_controllability_test, LemmaOrder, RankTol};
use inno_deepc::descriptor::simulate;
use inno_deepc::linalg::Vector;
use inno_deepc::microgrid::{build_plant, collect_data, excitation_signal, ExperimentConfig};

fn main() -> inno_deepc::Result<()> {
    let cfg = ExperimentConfig { noise_w_std: 0.0, noise_v_std: 0.0, ..Default::default() };
    let plant = build_plant(&cfg)?;
    let data = collect_data(&plant, &cfg, 0)?.trajectory;
    let (window, s) = (10, plant.s());
    let order = LemmaOrder::Known { n_s: plant.n_s(), s };

    let mut other = cfg.clone();
    other.params.r_load *= 1.25;
    for (label, p) in [("same system", plant.clone()), ("R_L + 25%", build_plant(&other)?)] {
        let mut u = excitation_signal(&cfg, 30 + s - 1, 99);
        for (i, mut row) in u.row_iter_mut().enumerate() {
            row.add_scalar_mut(-cfg.u_set_1[i]);
        }
        let y = simulate(&p.system, &p.wf, &u, None, &Vector::zeros(p.n_s()))?.y;
        let rep = fl_membership(
            &data.u,
            &data.y,
            window,
            order,
            &u.columns(15, window).into_owned(),
            &y.columns(15, window).into_owned(),
        )?;
        println!("{label:<12} residual {:.2e} member {}", rep.residual, rep.member);
    }

    let rc = r_controllability_test(&data.u.columns(0, data.len()).into_owned(), &data.y, cfg.l_prime, plant.n_s(), s, RankTol::Default)?;
    println!(
        "R-controllability at depth {}: expected rank {}, min rank {}, verdict {}",
        cfg.l_prime,
        rc.expected_rank,
        rc.min_rank(),
        rc.verdict
    );
    Ok(())
}
