use std::path::Path;

use crate::descriptor::{DescriptorSystem, WeierstrassForm};
use crate::error::{dim_check, Error, Result};
use crate::linalg::{psd_factor, Mat, Vector};
use crate::rng::{gaussian_matrix, stream_rng, Stream};

/// Threshold (relative to the largest eigenvalue) below which eigenpairs of a
/// noise covariance are discarded when factoring it.
pub const NOISE_RANK_REL: f64 = 1e-10;

/// Input/output record, one column per time step.
///
/// `u` may carry look-ahead columns beyond the last output: descriptor outputs
/// depend on up to `s - 1` future inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub u: Mat,
    pub y: Mat,
    pub x: Option<Mat>,
}

impl Trajectory {
    pub fn new(u: Mat, y: Mat) -> Result<Self> {
        dim_check(u.ncols() >= y.ncols(), || format!("{} inputs for {} outputs", u.ncols(), y.ncols()))?;
        Ok(Self { u, y, x: None })
    }

    pub fn len(&self) -> usize {
        self.y.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.y.ncols() == 0
    }

    /// Inputs available past the last output.
    pub fn lookahead(&self) -> usize {
        self.u.ncols() - self.y.ncols()
    }

    /// Copy restricted to the first `len` outputs (inputs keep `lookahead`
    /// extra columns when available).
    pub fn truncated(&self, len: usize, lookahead: usize) -> Self {
        let ucols = (len + lookahead).min(self.u.ncols());
        Self {
            u: self.u.columns(0, ucols).into_owned(),
            y: self.y.columns(0, len).into_owned(),
            x: self.x.as_ref().map(|x| x.columns(0, len.min(x.ncols())).into_owned()),
        }
    }

    /// CSV with columns `k, t_seconds, u1..um, y1..yp`. Look-ahead rows leave
    /// the output cells empty.
    pub fn write_csv(&self, path: impl AsRef<Path>, h: f64) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let (m, p) = (self.u.nrows(), self.y.nrows());
        let mut header = vec!["k".to_string(), "t_seconds".to_string()];
        header.extend((1..=m).map(|i| format!("u{i}")));
        header.extend((1..=p).map(|i| format!("y{i}")));
        w.write_record(&header)?;
        for k in 0..self.u.ncols() {
            let mut rec = vec![k.to_string(), format!("{}", k as f64 * h)];
            rec.extend(self.u.column(k).iter().map(|v| format!("{v:e}")));
            if k < self.y.ncols() {
                rec.extend(self.y.column(k).iter().map(|v| format!("{v:e}")));
            } else {
                rec.extend(std::iter::repeat_n(String::new(), p));
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let header = r.headers()?.clone();
        let m = header.iter().filter(|h| h.starts_with('u')).count();
        let p = header.iter().filter(|h| h.starts_with('y')).count();
        let ucol: Vec<usize> = (0..header.len()).filter(|&i| header[i].starts_with('u')).collect();
        let ycol: Vec<usize> = (0..header.len()).filter(|&i| header[i].starts_with('y')).collect();
        let mut us = Vec::new();
        let mut ys = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let parse = |i: usize| rec[i].parse::<f64>().map_err(|e| Error::Parse(format!("column {}: {e}", &header[i])));
            for &i in &ucol {
                us.push(parse(i)?);
            }
            if ycol.iter().all(|&i| !rec[i].is_empty()) {
                if us.len() / m.max(1) != ys.len() / p.max(1) + 1 {
                    return Err(Error::Parse("output rows must precede look-ahead rows".into()));
                }
                for &i in &ycol {
                    ys.push(parse(i)?);
                }
            }
        }
        let tu = us.len().checked_div(m).unwrap_or(0);
        let ty = ys.len().checked_div(p).unwrap_or(0);
        Self::new(Mat::from_column_slice(m, tu, &us), Mat::from_column_slice(p, ty, &ys))
    }
}

/// Standardized driving noise `eps_k ~ N(0, I_{r_w})` and measurement noise
/// `v_k ~ N(0, R)`, with the factor `L` such that `Q_bar = L L^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRealization {
    /// `r_w x (length + s)`; the descriptor simulation uses the first
    /// `length + s - 1` columns, the augmented one all of them.
    pub eps: Mat,
    /// `p x length`.
    pub v: Mat,
    pub seed: u64,
    pub r_w: usize,
    /// `n x r_w`, rows split as `[L_s; L_f]`.
    pub factor_l: Mat,
}

impl NoiseRealization {
    pub fn factor_slow(&self, n_s: usize) -> Mat {
        self.factor_l.rows(0, n_s).into_owned()
    }

    pub fn factor_fast(&self, n_s: usize) -> Mat {
        let n = self.factor_l.nrows();
        self.factor_l.rows(n_s, n - n_s).into_owned()
    }

    /// All-zero realization with the structure of `sample_noise`.
    pub fn zeros(sys: &DescriptorSystem, wf: &WeierstrassForm, length: usize) -> Self {
        let factor_l = psd_factor(&wf.q_bar, NOISE_RANK_REL);
        let r_w = factor_l.ncols();
        Self { eps: Mat::zeros(r_w, length + wf.s), v: Mat::zeros(sys.p(), length), seed: 0, r_w, factor_l }
    }
}

/// Draws `length` output samples worth of noise. `eps` is drawn first (column
/// by column), then `v`, from the `Noise` stream of `seed`.
pub fn sample_noise(sys: &DescriptorSystem, wf: &WeierstrassForm, length: usize, seed: u64) -> NoiseRealization {
    sample_noise_from(sys, wf, length, seed, Stream::Noise)
}

pub fn sample_noise_from(
    sys: &DescriptorSystem,
    wf: &WeierstrassForm,
    length: usize,
    seed: u64,
    stream: Stream,
) -> NoiseRealization {
    let factor_l = psd_factor(&wf.q_bar, NOISE_RANK_REL);
    let r_w = factor_l.ncols();
    let mut rng = stream_rng(seed, stream);
    let eps = gaussian_matrix(&mut rng, r_w, length + wf.s);
    let r_factor = psd_factor(&sys.r_noise, NOISE_RANK_REL);
    let v_std = gaussian_matrix(&mut rng, r_factor.ncols(), length);
    let v = if r_factor.ncols() == 0 { Mat::zeros(sys.p(), length) } else { &r_factor * v_std };
    NoiseRealization { eps, v, seed, r_w, factor_l }
}

/// Simulates the decomposed system.
///
/// The slow state follows `x^s_{k+1} = J x^s_k + B_s u_k + L_s eps_k`; the
/// fast state is the consistent value
/// `x^f_k = -sum_{i<s} N^i (B_f u_{k+i} + L_f eps_{k+i})`; the output is
/// `y_k = C_s x^s_k + C_f x^f_k + D u_k + v_k`. The returned trajectory has
/// `u.ncols() - (s - 1)` outputs, keeps all inputs as look-ahead and includes
/// the descriptor state `T [x^s; x^f]`.
pub fn simulate(
    sys: &DescriptorSystem,
    wf: &WeierstrassForm,
    u: &Mat,
    noise: Option<&NoiseRealization>,
    x0_slow: &Vector,
) -> Result<Trajectory> {
    let s = wf.s;
    if u.ncols() < s {
        return Err(Error::Input(format!("need at least s = {s} input samples, got {}", u.ncols())));
    }
    let len = u.ncols() + 1 - s;
    let mut plant = PlantStepper::new(sys, wf, noise.cloned(), x0_slow)?;
    if let Some(nz) = noise {
        if nz.eps.ncols() + 1 < len + s || nz.v.ncols() < len {
            return Err(Error::Input(format!(
                "noise covers {} eps / {} v samples; need {} / {len}",
                nz.eps.ncols(),
                nz.v.ncols(),
                len + s - 1
            )));
        }
    }
    let mut y = Mat::zeros(sys.p(), len);
    let mut x = Mat::zeros(sys.n(), len);
    for k in 0..len {
        let window = u.columns(k, s).into_owned();
        let (yk, xk) = plant.emit_with_state(&window)?;
        y.set_column(k, &yk);
        x.set_column(k, &xk);
    }
    Ok(Trajectory { u: u.clone(), y, x: Some(x) })
}

/// Step-by-step version of [`simulate`] for closed loops: each call supplies
/// the inputs `u_k .. u_{k+s-1}` and receives `y_k`.
#[derive(Debug, Clone)]
pub struct PlantStepper {
    wf: WeierstrassForm,
    d: Mat,
    n_pow: Vec<Mat>,
    l_s: Mat,
    l_f: Mat,
    noise: Option<NoiseRealization>,
    x_slow: Vector,
    k: usize,
}

impl PlantStepper {
    pub fn new(
        sys: &DescriptorSystem,
        wf: &WeierstrassForm,
        noise: Option<NoiseRealization>,
        x0_slow: &Vector,
    ) -> Result<Self> {
        dim_check(x0_slow.len() == wf.n_s, || format!("x0_slow has {} entries, n_s = {}", x0_slow.len(), wf.n_s))?;
        let (l_s, l_f) = match &noise {
            Some(nz) => {
                dim_check(nz.factor_l.nrows() == sys.n(), || "noise factor has wrong row count".into())?;
                (nz.factor_slow(wf.n_s), nz.factor_fast(wf.n_s))
            }
            None => (Mat::zeros(wf.n_s, 0), Mat::zeros(wf.n_f, 0)),
        };
        Ok(Self {
            n_pow: wf.nilpotent_powers(),
            wf: wf.clone(),
            d: sys.d.clone(),
            l_s,
            l_f,
            noise,
            x_slow: x0_slow.clone(),
            k: 0,
        })
    }

    pub fn step_index(&self) -> usize {
        self.k
    }

    pub fn slow_state(&self) -> &Vector {
        &self.x_slow
    }

    /// Output at the current step, then advances the slow state.
    pub fn emit(&mut self, window: &Mat) -> Result<Vector> {
        self.emit_with_state(window).map(|(y, _)| y)
    }

    /// Like [`emit`](Self::emit) but also returns the measurement-free output
    /// `y_k - v_k`.
    pub fn emit_noise_split(&mut self, window: &Mat) -> Result<(Vector, Vector)> {
        let k = self.k;
        let y = self.emit(window)?;
        let v = match &self.noise {
            Some(nz) if nz.v.ncols() > k => nz.v.column(k).into_owned(),
            _ => Vector::zeros(y.len()),
        };
        let clean = &y - v;
        Ok((y, clean))
    }

    fn emit_with_state(&mut self, window: &Mat) -> Result<(Vector, Vector)> {
        let wf = &self.wf;
        let (s, k) = (wf.s, self.k);
        dim_check(window.ncols() == s && window.nrows() == wf.b_s.ncols(), || {
            format!("input window is {:?}, expected {}x{s}", window.shape(), wf.b_s.ncols())
        })?;
        let mut x_fast = Vector::zeros(wf.n_f);
        for i in 0..s {
            let mut drive = &wf.b_f * window.column(i);
            if let Some(nz) = &self.noise {
                if nz.r_w > 0 {
                    if k + i >= nz.eps.ncols() {
                        return Err(Error::Input(format!("noise horizon exhausted at step {}", k + i)));
                    }
                    drive += &self.l_f * nz.eps.column(k + i);
                }
            }
            x_fast -= &self.n_pow[i] * drive;
        }
        let u0 = window.column(0);
        let mut y = &wf.c_s * &self.x_slow + &wf.c_f * &x_fast + &self.d * u0;
        let mut next = &wf.j * &self.x_slow + &wf.b_s * u0;
        if let Some(nz) = &self.noise {
            if nz.v.ncols() <= k {
                return Err(Error::Input(format!("measurement noise horizon exhausted at step {k}")));
            }
            y += nz.v.column(k);
            if nz.r_w > 0 {
                next += &self.l_s * nz.eps.column(k);
            }
        }
        let x_desc = &wf.t * crate::linalg::vcat_vec(&[&self.x_slow, &x_fast]);
        self.x_slow = next;
        self.k += 1;
        Ok((y, x_desc))
    }
}
