use crate::control::{Controller, ControllerState};
use crate::descriptor::PlantStepper;
use crate::error::{dim_check, Result};
use crate::linalg::{Mat, Vector};

#[derive(Debug, Clone)]
pub struct StepRecord {
    /// Control-step index, counted from the end of the warm-up.
    pub k: usize,
    pub u: Vector,
    pub y: Vector,
    /// Output without measurement noise.
    pub y_clean: Vector,
    pub reference: Vector,
    /// One-step prediction of `y`.
    pub y_hat: Vector,
    /// `y - y_hat`.
    pub e: Vector,
    pub qp_iterations: usize,
    pub softened: bool,
}

#[derive(Debug, Clone)]
pub struct ClosedLoopTrace {
    pub controller: String,
    pub records: Vec<StepRecord>,
}

/// Runs `L_p` warm-up steps with the supplied inputs (innovation window kept
/// at zero) and then `steps` receding-horizon steps.
///
/// The plant output at `t` needs `u_t .. u_{t+s-1}`, so each controller step
/// keeps the `s - 1` inputs decided earlier fixed, commits block `s - 1` of
/// its plan, receives `y_t`, and sets `e_t = y_t - y_hat_t` from the same plan.
/// `warmup` holds `L_p + s - 1` inputs; `reference(k)` is the setpoint at
/// control step `k`, held over the horizon.
pub fn run_closed_loop(
    ctrl: &mut dyn Controller,
    mut plant: PlantStepper,
    l_p: usize,
    l_f: usize,
    s: usize,
    warmup: &Mat,
    steps: usize,
    reference: impl Fn(usize) -> Vector,
) -> Result<ClosedLoopTrace> {
    let (m, s) = (warmup.nrows(), s.max(1));
    dim_check(warmup.ncols() == l_p + s - 1, || format!("warm-up needs {} inputs, got {}", l_p + s - 1, warmup.ncols()))?;
    let mut state: Option<ControllerState> = None;
    for k in 0..l_p {
        let window = warmup.columns(k, s).into_owned();
        let y = plant.emit(&window)?;
        let st = state.get_or_insert_with(|| ControllerState::new(m, y.len(), l_p));
        st.push(&window.column(0).into_owned(), &y, &Vector::zeros(y.len()));
    }
    let mut state = state.expect("warm-up has at least one step");
    state.t = 0;
    let p = state.y.nrows();
    let mut committed = warmup.columns(l_p, s - 1).into_owned();
    let mut records = Vec::with_capacity(steps);
    for k in 0..steps {
        let r = reference(k);
        let r_stack = Vector::from_fn(p * l_f, |i, _| r[i % p]);
        let decision = ctrl.decide(&state, &committed, &r_stack)?;
        let mut window = Mat::zeros(m, s);
        window.columns_mut(0, s - 1).copy_from(&committed);
        window.set_column(s - 1, &decision.u_f.rows((s - 1) * m, m));
        let (y, y_clean) = plant.emit_noise_split(&window)?;
        let y_hat = decision.y_f.rows(0, p).into_owned();
        let e = &y - &y_hat;
        let u = window.column(0).into_owned();
        state.push(&u, &y, &e);
        committed = window.columns(1, s - 1).into_owned();
        records.push(StepRecord {
            k,
            u,
            y,
            y_clean,
            reference: r,
            y_hat,
            e,
            qp_iterations: decision.status.iterations,
            softened: decision.status.softened,
        });
    }
    Ok(ClosedLoopTrace { controller: ctrl.name().to_string(), records })
}
