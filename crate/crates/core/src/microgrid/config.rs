use std::fmt::Write as _;
use std::path::Path;

use crate::control::{ChannelBox, ControllerConfig};
use crate::error::{Error, Result};
use crate::linalg::{Mat, Vector};
use crate::microgrid::MicrogridParams;

/// Benchmark settings. Read from a flat `key = value` file; `#` starts a
/// comment. Vectors are comma separated; a weight given as one number means
/// that multiple of the identity, a list gives the diagonal.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub t_data: usize,
    pub noise_w_std: f64,
    pub noise_v_std: f64,
    pub ell: usize,
    pub l_p: usize,
    pub l_f: usize,
    pub w_y: Mat,
    pub w_u: Mat,
    pub lambda_g: f64,
    pub u_set_1: Vector,
    pub u_set_2: Vector,
    /// Absolute step (warm-up included) at which the reference switches.
    pub switch_step: usize,
    pub run_steps: usize,
    pub seeds: Vec<u64>,
    pub prbs_amplitude: f64,
    pub prbs_hold: usize,
    pub sine_amplitude: f64,
    /// Hz.
    pub sine_frequency: f64,
    pub dither_std: f64,
    /// Standard deviation of the warm-up inputs around `u_set_1`.
    pub warmup_std: f64,
    /// Depth of the data-based R-controllability test.
    pub l_prime: usize,
    pub u_box: Option<ChannelBox>,
    pub y_box: Option<ChannelBox>,
    pub params: MicrogridParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            t_data: 300,
            noise_w_std: 0.03,
            noise_v_std: 0.6,
            ell: 15,
            l_p: 12,
            l_f: 20,
            w_y: Mat::identity(3, 3),
            w_u: Mat::identity(2, 2) * 0.05,
            lambda_g: 50.0,
            u_set_1: Vector::from_vec(vec![5.0, 2.5]),
            u_set_2: Vector::from_vec(vec![4.0, 1.8]),
            switch_step: 82,
            run_steps: 150,
            seeds: (0..10).collect(),
            prbs_amplitude: 0.5,
            prbs_hold: 2,
            sine_amplitude: 0.25,
            sine_frequency: 0.3,
            dither_std: 0.125,
            warmup_std: 0.2,
            l_prime: 4,
            u_box: None,
            y_box: None,
            params: MicrogridParams::default(),
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim().parse().map_err(|_| Error::Parse(format!("{key}: '{v}' is not a number")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.trim().parse().map_err(|_| Error::Parse(format!("{key}: '{v}' is not a non-negative integer")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|x| parse_f64(key, x)).collect()
}

fn parse_vector(key: &str, v: &str, len: usize) -> Result<Vector> {
    let xs = parse_list(key, v)?;
    if xs.len() != len {
        return Err(Error::Parse(format!("{key}: expected {len} values, got {}", xs.len())));
    }
    Ok(Vector::from_vec(xs))
}

fn parse_weight(key: &str, v: &str, dim: usize) -> Result<Mat> {
    let xs = parse_list(key, v)?;
    match xs.len() {
        1 => Ok(Mat::identity(dim, dim) * xs[0]),
        n if n == dim => Ok(Mat::from_diagonal(&Vector::from_vec(xs))),
        n => Err(Error::Parse(format!("{key}: expected 1 or {dim} values, got {n}"))),
    }
}

fn parse_seeds(v: &str) -> Result<Vec<u64>> {
    let v = v.trim();
    if let Some((a, b)) = v.split_once("..") {
        let (a, b): (u64, u64) = (
            a.trim().parse().map_err(|_| Error::Parse(format!("seeds: bad range '{v}'")))?,
            b.trim().parse().map_err(|_| Error::Parse(format!("seeds: bad range '{v}'")))?,
        );
        return Ok((a..b).collect());
    }
    v.split(',')
        .map(|x| x.trim().parse().map_err(|_| Error::Parse(format!("seeds: '{x}' is not an integer"))))
        .collect()
}

fn join(v: &Vector) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", ")
}

fn join_diag(m: &Mat) -> String {
    join(&m.diagonal())
}

impl ExperimentConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let k = key.trim();
        let v = value.trim();
        match k {
            "T_data" => self.t_data = parse_usize(k, v)?,
            "noise_w_std" => self.noise_w_std = parse_f64(k, v)?,
            "noise_v_std" => self.noise_v_std = parse_f64(k, v)?,
            "ell" => self.ell = parse_usize(k, v)?,
            "L_p" => self.l_p = parse_usize(k, v)?,
            "L_f" => self.l_f = parse_usize(k, v)?,
            "W_y" => self.w_y = parse_weight(k, v, 3)?,
            "W_u" => self.w_u = parse_weight(k, v, 2)?,
            "lambda_g" => self.lambda_g = parse_f64(k, v)?,
            "u_set_1" => self.u_set_1 = parse_vector(k, v, 2)?,
            "u_set_2" => self.u_set_2 = parse_vector(k, v, 2)?,
            "switch_step" => self.switch_step = parse_usize(k, v)?,
            "run_steps" => self.run_steps = parse_usize(k, v)?,
            "seeds" => self.seeds = parse_seeds(v)?,
            "prbs_amplitude" => self.prbs_amplitude = parse_f64(k, v)?,
            "prbs_hold" => self.prbs_hold = parse_usize(k, v)?,
            "sine_amplitude" => self.sine_amplitude = parse_f64(k, v)?,
            "sine_frequency" => self.sine_frequency = parse_f64(k, v)?,
            "dither_std" => self.dither_std = parse_f64(k, v)?,
            "warmup_std" => self.warmup_std = parse_f64(k, v)?,
            "l_prime" => self.l_prime = parse_usize(k, v)?,
            "u_lower" | "u_upper" | "y_lower" | "y_upper" => {
                let dim = if k.starts_with('u') { 2 } else { 3 };
                let vals = parse_vector(k, v, dim)?;
                let slot = if k.starts_with('u') { &mut self.u_box } else { &mut self.y_box };
                let mut b = slot.take().unwrap_or(ChannelBox {
                    lower: Vector::from_element(dim, f64::NEG_INFINITY),
                    upper: Vector::from_element(dim, f64::INFINITY),
                });
                if k.ends_with("lower") {
                    b.lower = vals;
                } else {
                    b.upper = vals;
                }
                *slot = Some(b);
            }
            "C1" => self.params.c1 = parse_f64(k, v)?,
            "C4" => self.params.c4 = parse_f64(k, v)?,
            "L12" => self.params.l12 = parse_f64(k, v)?,
            "L23" => self.params.l23 = parse_f64(k, v)?,
            "L24" => self.params.l24 = parse_f64(k, v)?,
            "R12" => self.params.r12 = parse_f64(k, v)?,
            "R23" => self.params.r23 = parse_f64(k, v)?,
            "R24" => self.params.r24 = parse_f64(k, v)?,
            "R_L" => self.params.r_load = parse_f64(k, v)?,
            "h" => self.params.h = parse_f64(k, v)?,
            "orientation" => self.params.orientation = v.parse()?,
            _ => return Err(Error::Parse(format!("unknown key '{k}'"))),
        }
        Ok(())
    }

    /// Defaults overridden by the lines of `text`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected 'key = value'", i + 1)))?;
            cfg.set(k, v).map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let p = &self.params;
        let seeds: Vec<String> = self.seeds.iter().map(|s| s.to_string()).collect();
        let _ = writeln!(out, "T_data = {}", self.t_data);
        let _ = writeln!(out, "noise_w_std = {}", self.noise_w_std);
        let _ = writeln!(out, "noise_v_std = {}", self.noise_v_std);
        let _ = writeln!(out, "ell = {}", self.ell);
        let _ = writeln!(out, "L_p = {}", self.l_p);
        let _ = writeln!(out, "L_f = {}", self.l_f);
        let _ = writeln!(out, "W_y = {}", join_diag(&self.w_y));
        let _ = writeln!(out, "W_u = {}", join_diag(&self.w_u));
        let _ = writeln!(out, "lambda_g = {}", self.lambda_g);
        let _ = writeln!(out, "u_set_1 = {}", join(&self.u_set_1));
        let _ = writeln!(out, "u_set_2 = {}", join(&self.u_set_2));
        let _ = writeln!(out, "switch_step = {}", self.switch_step);
        let _ = writeln!(out, "run_steps = {}", self.run_steps);
        let _ = writeln!(out, "seeds = {}", seeds.join(", "));
        let _ = writeln!(out, "prbs_amplitude = {}", self.prbs_amplitude);
        let _ = writeln!(out, "prbs_hold = {}", self.prbs_hold);
        let _ = writeln!(out, "sine_amplitude = {}", self.sine_amplitude);
        let _ = writeln!(out, "sine_frequency = {}", self.sine_frequency);
        let _ = writeln!(out, "dither_std = {}", self.dither_std);
        let _ = writeln!(out, "warmup_std = {}", self.warmup_std);
        let _ = writeln!(out, "l_prime = {}", self.l_prime);
        for (name, b) in [("u", &self.u_box), ("y", &self.y_box)] {
            if let Some(b) = b {
                let _ = writeln!(out, "{name}_lower = {}", join(&b.lower));
                let _ = writeln!(out, "{name}_upper = {}", join(&b.upper));
            }
        }
        for (k, v) in [
            ("C1", p.c1),
            ("C4", p.c4),
            ("L12", p.l12),
            ("L23", p.l23),
            ("L24", p.l24),
            ("R12", p.r12),
            ("R23", p.r23),
            ("R24", p.r24),
            ("R_L", p.r_load),
            ("h", p.h),
        ] {
            let _ = writeln!(out, "{k} = {v}");
        }
        let _ = writeln!(out, "orientation = {}", p.orientation);
        out
    }

    /// Checks ranges that do not depend on the plant structure.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.noise_w_std < 0.0 || self.noise_v_std < 0.0 {
            return Err(Error::Input("noise standard deviations must be non-negative".into()));
        }
        if self.l_p == 0 || self.l_f == 0 || self.ell == 0 || self.prbs_hold == 0 {
            return Err(Error::Input("L_p, L_f, ell and prbs_hold must be positive".into()));
        }
        if self.switch_step < self.l_p || self.switch_step >= self.l_p + self.run_steps {
            return Err(Error::Input(format!(
                "switch_step {} outside the control range [{}, {})",
                self.switch_step,
                self.l_p,
                self.l_p + self.run_steps
            )));
        }
        if self.seeds.is_empty() {
            return Err(Error::Input("no seeds given".into()));
        }
        for b in [&self.u_box, &self.y_box].into_iter().flatten() {
            ChannelBox::new(b.lower.clone(), b.upper.clone())?;
        }
        Ok(())
    }

    /// Structure-dependent check, `L_f >= s`.
    pub fn validate_for(&self, s: usize) -> Result<()> {
        self.controller_config().validate(2, 3, s)
    }

    pub fn controller_config(&self) -> ControllerConfig {
        ControllerConfig {
            l_p: self.l_p,
            l_f: self.l_f,
            w_y: self.w_y.clone(),
            w_u: self.w_u.clone(),
            u_box: self.u_box.clone(),
            y_box: self.y_box.clone(),
            lambda_g: self.lambda_g,
        }
    }

    /// Reference at absolute step `k`.
    pub fn phase(&self, k: usize) -> usize {
        usize::from(k >= self.switch_step)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut cfg = ExperimentConfig::default();
        cfg.set("W_y", "1, 2, 3").unwrap();
        cfg.set("u_lower", "0, 0").unwrap();
        cfg.set("orientation", "generation").unwrap();
        let back = ExperimentConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(back.to_text(), cfg.to_text());
        assert_eq!(back.w_y[(2, 2)], 3.0);
        assert_eq!(back.u_box.unwrap().upper[0], f64::INFINITY);
    }

    #[test]
    fn comments_scalars_and_ranges() {
        let cfg = ExperimentConfig::parse("# demo\nW_u = 0.1  # scalar\nseeds = 3..6\nT_data=400\n").unwrap();
        assert_eq!(cfg.w_u, Mat::identity(2, 2) * 0.1);
        assert_eq!(cfg.seeds, vec![3, 4, 5]);
        assert_eq!(cfg.t_data, 400);
    }

    #[test]
    fn bad_input_is_rejected() {
        assert!(ExperimentConfig::parse("bogus = 1").is_err());
        assert!(ExperimentConfig::parse("ell = -1").is_err());
        assert!(ExperimentConfig::parse("u_set_1 = 1, 2, 3").is_err());
        assert!(ExperimentConfig::parse("switch_step = 5").is_err());
        assert!(ExperimentConfig::parse("L_f").is_err());
    }
}
