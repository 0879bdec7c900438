use std::fmt::Write as _;
use std::path::Path;

use crate::error::{dim_check, Error, Result};
use crate::linalg::{max_abs, min_eigenvalue_sym, Mat};

/// `E x_{k+1} = A x_k + B u_k + w_k`, `y_k = C x_k + D u_k + v_k` with
/// `w ~ N(0, Q)` and `v ~ N(0, R)`.
///
/// The same type carries continuous-time models (`E x' = A x + B u`) before
/// discretization; the semantics are decided by the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorSystem {
    pub e: Mat,
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
    pub d: Mat,
    pub q_noise: Mat,
    pub r_noise: Mat,
}

const SYM_TOL: f64 = 1e-10;

impl DescriptorSystem {
    /// Builds a system and checks dimensions and covariance symmetry.
    ///
    /// `r_noise` is accepted when positive semidefinite so that noise-free
    /// experiments can pass `R = 0`; the Kalman construction rejects a
    /// singular innovation covariance later on.
    pub fn new(e: Mat, a: Mat, b: Mat, c: Mat, d: Mat, q_noise: Mat, r_noise: Mat) -> Result<Self> {
        let n = e.nrows();
        dim_check(e.is_square(), || format!("E is {}x{}", e.nrows(), e.ncols()))?;
        dim_check(a.shape() == (n, n), || format!("A is {:?}, expected {n}x{n}", a.shape()))?;
        dim_check(b.nrows() == n, || format!("B has {} rows, expected {n}", b.nrows()))?;
        dim_check(c.ncols() == n, || format!("C has {} columns, expected {n}", c.ncols()))?;
        let (m, p) = (b.ncols(), c.nrows());
        dim_check(d.shape() == (p, m), || format!("D is {:?}, expected {p}x{m}", d.shape()))?;
        dim_check(q_noise.shape() == (n, n), || format!("Q is {:?}, expected {n}x{n}", q_noise.shape()))?;
        dim_check(r_noise.shape() == (p, p), || format!("R is {:?}, expected {p}x{p}", r_noise.shape()))?;
        for (name, w) in [("Q", &q_noise), ("R", &r_noise)] {
            let scale = max_abs(w).max(1.0);
            if max_abs(&(w - w.transpose())) > SYM_TOL * scale {
                return Err(Error::Input(format!("{name} is not symmetric")));
            }
            if min_eigenvalue_sym(w) < -SYM_TOL * scale {
                return Err(Error::Input(format!("{name} is not positive semidefinite")));
            }
        }
        Ok(Self { e, a, b, c, d, q_noise, r_noise })
    }

    /// System without noise (`Q = 0`, `R = 0`).
    pub fn deterministic(e: Mat, a: Mat, b: Mat, c: Mat, d: Mat) -> Result<Self> {
        let (n, p) = (e.nrows(), c.nrows());
        Self::new(e, a, b, c, d, Mat::zeros(n, n), Mat::zeros(p, p))
    }

    pub fn with_noise(mut self, q_noise: Mat, r_noise: Mat) -> Result<Self> {
        self.q_noise = q_noise;
        self.r_noise = r_noise;
        Self::new(self.e, self.a, self.b, self.c, self.d, self.q_noise, self.r_noise)
    }

    pub fn n(&self) -> usize {
        self.e.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    /// Plain-text form: a header line `descriptor n m p`, then each matrix as
    /// its name on one line followed by its rows (row-major, space separated).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "descriptor {} {} {}", self.n(), self.m(), self.p());
        for (name, mat) in self.named() {
            let _ = writeln!(out, "{name} {} {}", mat.nrows(), mat.ncols());
            for i in 0..mat.nrows() {
                let row: Vec<String> = mat.row(i).iter().map(|v| format!("{v:e}")).collect();
                let _ = writeln!(out, "{}", row.join(" "));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty input".into()))?;
        let dims = parse_header(header, "descriptor", 3)?;
        let (n, m, p) = (dims[0], dims[1], dims[2]);
        let mut mats = Vec::with_capacity(7);
        for (name, rows, cols) in [
            ("E", n, n),
            ("A", n, n),
            ("B", n, m),
            ("C", p, n),
            ("D", p, m),
            ("Q", n, n),
            ("R", p, p),
        ] {
            let head = lines.next().ok_or_else(|| Error::Parse(format!("missing matrix {name}")))?;
            let shape = parse_header(head, name, 2)?;
            if shape != [rows, cols] {
                return Err(Error::Parse(format!("{name} declared {shape:?}, expected [{rows}, {cols}]")));
            }
            let mut data = Vec::with_capacity(rows * cols);
            for i in 0..rows {
                let line = lines.next().ok_or_else(|| Error::Parse(format!("{name}: missing row {i}")))?;
                let vals = line
                    .split_whitespace()
                    .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("{name} row {i}: {e}"))))
                    .collect::<Result<Vec<_>>>()?;
                if vals.len() != cols {
                    return Err(Error::Parse(format!("{name} row {i}: {} values, expected {cols}", vals.len())));
                }
                data.extend(vals);
            }
            mats.push(Mat::from_row_slice(rows, cols, &data));
        }
        let mut it = mats.into_iter();
        let mut next = || it.next().expect("seven matrices parsed");
        Self::new(next(), next(), next(), next(), next(), next(), next())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    fn named(&self) -> [(&'static str, &Mat); 7] {
        [
            ("E", &self.e),
            ("A", &self.a),
            ("B", &self.b),
            ("C", &self.c),
            ("D", &self.d),
            ("Q", &self.q_noise),
            ("R", &self.r_noise),
        ]
    }
}

fn parse_header(line: &str, tag: &str, count: usize) -> Result<Vec<usize>> {
    let mut toks = line.split_whitespace();
    if toks.next() != Some(tag) {
        return Err(Error::Parse(format!("expected '{tag}' header, got '{line}'")));
    }
    let vals = toks
        .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(format!("{tag} header: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    if vals.len() != count {
        return Err(Error::Parse(format!("{tag} header needs {count} integers")));
    }
    Ok(vals)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DescriptorSystem {
        DescriptorSystem::new(
            Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            Mat::from_row_slice(2, 2, &[0.5, 1.0, 0.0, 1.0]),
            Mat::from_row_slice(2, 1, &[1.0, -1.0]),
            Mat::from_row_slice(1, 2, &[1.0, 2.0]),
            Mat::zeros(1, 1),
            Mat::identity(2, 2) * 0.01,
            Mat::identity(1, 1) * 0.1,
        )
        .unwrap()
    }

    #[test]
    fn text_format_round_trips() {
        let sys = sample();
        assert_eq!(DescriptorSystem::from_text(&sys.to_text()).unwrap(), sys);
    }

    #[test]
    fn rejects_bad_shapes_and_covariances() {
        let s = sample();
        let err = DescriptorSystem::new(s.e.clone(), s.a.clone(), Mat::zeros(3, 1), s.c.clone(), s.d.clone(), s.q_noise.clone(), s.r_noise.clone());
        assert!(matches!(err, Err(Error::Dimension(_))));
        let bad_q = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let err = DescriptorSystem::new(s.e, s.a, s.b, s.c, s.d, bad_q, s.r_noise);
        assert!(matches!(err, Err(Error::Input(_))));
    }
}
