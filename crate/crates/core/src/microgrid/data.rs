use rand::Rng;

use crate::behavioral::{is_persistently_exciting, ExcitationReport, RankTol};
use crate::descriptor::{
    discretize_foh, sample_noise, simulate, weierstrass_decompose, DescriptorSystem, FohDiscretization, NoiseRealization,
    Trajectory, WeierstrassForm, DEFAULT_DECOMPOSITION_TOL,
};
use crate::error::{Error, Result};
use crate::linalg::{psd_factor, Mat, Vector};
use crate::microgrid::{build_microgrid, steady_state, ExperimentConfig, SteadyState};
use crate::rng::{gaussian, stream_rng, Stream};

/// Continuous model, its FOH discretization with the configured noise, and
/// the operating points.
#[derive(Debug, Clone)]
pub struct Plant {
    pub continuous: DescriptorSystem,
    pub discretization: FohDiscretization,
    /// Discrete system with `Q = w^2 I_7`, `R = v^2 I_3`.
    pub system: DescriptorSystem,
    pub wf: WeierstrassForm,
    pub setpoint_1: SteadyState,
    pub setpoint_2: SteadyState,
    /// Slow state at the first operating point.
    pub x0_slow: Vector,
}

impl Plant {
    pub fn n_s(&self) -> usize {
        self.wf.n_s
    }

    pub fn s(&self) -> usize {
        self.wf.s
    }

    /// Rank of the driving noise after the decomposition.
    pub fn r_w(&self) -> usize {
        psd_factor(&self.wf.q_bar, crate::descriptor::NOISE_RANK_REL).ncols()
    }

    /// `n_xi = n_s + r_w (s + 1)`.
    pub fn n_xi(&self) -> usize {
        self.n_s() + self.r_w() * (self.s() + 1)
    }

    /// Slow equilibrium `(I - J)^{-1} B_s u` of the discrete model.
    pub fn slow_equilibrium(&self, u: &Vector) -> Result<Vector> {
        let n = self.wf.n_s;
        let rhs = &self.wf.b_s * u;
        (Mat::identity(n, n) - &self.wf.j)
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Structural("slow dynamics have a unit eigenvalue".into()))
    }

    pub fn reference(&self, phase: usize) -> &Vector {
        if phase == 0 {
            &self.setpoint_1.y
        } else {
            &self.setpoint_2.y
        }
    }
}

pub fn build_plant(cfg: &ExperimentConfig) -> Result<Plant> {
    let continuous = build_microgrid(&cfg.params)?;
    let discretization = discretize_foh(&continuous, cfg.params.h)?;
    let q = Mat::identity(7, 7) * cfg.noise_w_std.powi(2);
    let r = Mat::identity(3, 3) * cfg.noise_v_std.powi(2);
    let system = discretization.system.clone().with_noise(q, r)?;
    let wf = weierstrass_decompose(&system, DEFAULT_DECOMPOSITION_TOL)?;
    let setpoint_1 = steady_state(&continuous, &cfg.u_set_1)?;
    let setpoint_2 = steady_state(&continuous, &cfg.u_set_2)?;
    let mut plant = Plant { continuous, discretization, system, wf, setpoint_1, setpoint_2, x0_slow: Vector::zeros(0) };
    plant.x0_slow = plant.slow_equilibrium(&cfg.u_set_1)?;
    Ok(plant)
}

/// Offline experiment data.
#[derive(Debug, Clone)]
pub struct CollectedData {
    /// `T + s - 1` inputs and `T` outputs.
    pub trajectory: Trajectory,
    /// Noise-free response to the same inputs.
    pub clean: Trajectory,
    pub noise: NoiseRealization,
    pub snr_db: f64,
    /// Seed that produced the accepted excitation.
    pub seed: u64,
    pub attempts: usize,
    pub excitation: ExcitationReport,
}

const MAX_ATTEMPTS: usize = 5;

/// `u_set_1` plus held PRBS, one sinusoid per channel (phases a quarter
/// period apart) and Gaussian dither.
pub fn excitation_signal(cfg: &ExperimentConfig, len: usize, seed: u64) -> Mat {
    let m = cfg.u_set_1.len();
    let mut rng = stream_rng(seed, Stream::Excitation);
    let mut u = Mat::zeros(m, len);
    let mut level = vec![0.0; m];
    for k in 0..len {
        let t = k as f64 * cfg.params.h;
        for i in 0..m {
            if k % cfg.prbs_hold == 0 {
                level[i] = if rng.random_bool(0.5) { cfg.prbs_amplitude } else { -cfg.prbs_amplitude };
            }
            let phase = std::f64::consts::FRAC_PI_2 * i as f64;
            let sine = cfg.sine_amplitude * (std::f64::consts::TAU * cfg.sine_frequency * t + phase).sin();
            u[(i, k)] = cfg.u_set_1[i] + level[i] + sine + cfg.dither_std * gaussian(&mut rng);
        }
    }
    u
}

/// `10 log10(sum var(clean) / sum var(y - clean))` over all channels.
pub fn snr_db(y: &Mat, clean: &Mat) -> f64 {
    let var_rows = |m: &Mat| -> f64 {
        m.row_iter()
            .map(|r| {
                let mean = r.mean();
                r.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / r.len() as f64
            })
            .sum()
    };
    let signal = var_rows(clean);
    let noise = var_rows(&(y - clean));
    if noise == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (signal / noise).log10()
    }
}

/// Input order needed for the data-driven predictor, `L_p + L_f + n_xi`.
pub fn required_pe_order(cfg: &ExperimentConfig, plant: &Plant) -> usize {
    cfg.l_p + cfg.l_f + plant.n_xi()
}

/// Simulates the excitation experiment and checks that the input is
/// persistently exciting of order `L_p + L_f + n_xi`; a rejected draw is
/// retried with a new seed up to five times.
pub fn collect_data(plant: &Plant, cfg: &ExperimentConfig, seed: u64) -> Result<CollectedData> {
    let (t, s) = (cfg.t_data, plant.s());
    let order = required_pe_order(cfg, plant);
    let mut last = None;
    for attempt in 0..MAX_ATTEMPTS {
        let used = seed.wrapping_add(1_000_003 * attempt as u64);
        let u = excitation_signal(cfg, t + s - 1, used);
        let excitation = is_persistently_exciting(&u.columns(0, t).into_owned(), order, RankTol::Default);
        if !excitation.exciting {
            log::warn!("excitation with seed {used} not persistently exciting of order {order}; retrying");
            last = Some(excitation);
            continue;
        }
        let noise = sample_noise(&plant.system, &plant.wf, t, used);
        let trajectory = simulate(&plant.system, &plant.wf, &u, Some(&noise), &plant.x0_slow)?;
        let clean = simulate(&plant.system, &plant.wf, &u, None, &plant.x0_slow)?;
        let snr = snr_db(&trajectory.y, &clean.y);
        return Ok(CollectedData { trajectory, clean, noise, snr_db: snr, seed: used, attempts: attempt + 1, excitation });
    }
    let detail = last.map(|r| format!("rank {} of {}", r.rank, r.target)).unwrap_or_default();
    Err(Error::Precondition(format!(
        "no persistently exciting input of order {order} in {MAX_ATTEMPTS} attempts ({detail})"
    )))
}
