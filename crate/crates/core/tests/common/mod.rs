#![allow(dead_code)]

use inno_deepc::descriptor::DescriptorSystem;
use inno_deepc::linalg::{block_diag, Mat, Vector};
use inno_deepc::rng::gaussian_matrix;
use rand::Rng;

/// Pencil `(E, A) = P^{-1} (diag(I, N), diag(J, I)) T^{-1}` with known
/// structure. `N` is a direct sum of shift blocks.
pub struct RandomPencil {
    pub e: Mat,
    pub a: Mat,
    pub n_s: usize,
    pub n_f: usize,
    pub s: usize,
}

fn well_conditioned(rng: &mut impl Rng, n: usize) -> Mat {
    Mat::identity(n, n) + gaussian_matrix(rng, n, n) * (0.3 / (n as f64).sqrt())
}

pub fn random_pencil(rng: &mut impl Rng, n: usize) -> RandomPencil {
    let n_f = rng.random_range(0..=n);
    let n_s = n - n_f;
    let mut nil = Mat::zeros(n_f, n_f);
    let mut s = if n_f == 0 { 1 } else { 0 };
    let mut start = 0;
    while start < n_f {
        let size = rng.random_range(1..=(n_f - start).min(3));
        for i in 0..size - 1 {
            nil[(start + i, start + i + 1)] = 1.0;
        }
        s = s.max(size);
        start += size;
    }
    let j = gaussian_matrix(rng, n_s, n_s) * (0.5 / (n_s.max(1) as f64).sqrt());
    let p_inv = well_conditioned(rng, n);
    let t_inv = well_conditioned(rng, n);
    let e = &p_inv * block_diag(&[&Mat::identity(n_s, n_s), &nil]) * &t_inv;
    let a = &p_inv * block_diag(&[&j, &Mat::identity(n_f, n_f)]) * &t_inv;
    RandomPencil { e, a, n_s, n_f, s }
}

/// Exhaustive active-set search for `min 1/2 z'Hz + f'z`, `l <= z <= u`:
/// every variable is free, at its lower or at its upper bound; the best
/// feasible stationary point wins.
pub fn enumerate_box_qp(h: &Mat, f: &Vector, lower: &Vector, upper: &Vector) -> Vector {
    let n = f.len();
    let mut best: Option<(f64, Vector)> = None;
    for code in 0..3usize.pow(n as u32) {
        let mut z = Vector::zeros(n);
        let mut free = Vec::new();
        let mut c = code;
        for i in 0..n {
            match c % 3 {
                0 => free.push(i),
                1 => z[i] = lower[i],
                _ => z[i] = upper[i],
            }
            c /= 3;
        }
        if !free.is_empty() {
            let k = free.len();
            let mut hff = Mat::zeros(k, k);
            let mut rhs = Vector::zeros(k);
            for (a, &i) in free.iter().enumerate() {
                let mut acc = -f[i];
                for j in 0..n {
                    if !free.contains(&j) {
                        acc -= h[(i, j)] * z[j];
                    }
                }
                rhs[a] = acc;
                for (b, &j) in free.iter().enumerate() {
                    hff[(a, b)] = h[(i, j)];
                }
            }
            let Some(sol) = hff.lu().solve(&rhs) else { continue };
            for (a, &i) in free.iter().enumerate() {
                z[i] = sol[a];
            }
        }
        if (0..n).any(|i| z[i] < lower[i] - 1e-12 || z[i] > upper[i] + 1e-12) {
            continue;
        }
        let obj = 0.5 * z.dot(&(h * &z)) + f.dot(&z);
        if best.as_ref().is_none_or(|(b, _)| obj < *b) {
            best = Some((obj, z));
        }
    }
    best.expect("a box always has a feasible vertex").1
}

/// Random positive definite `H`, linear term and box with `lower < upper`.
pub fn random_box_qp(rng: &mut impl Rng, n: usize) -> (Mat, Vector, Vector, Vector) {
    let g = gaussian_matrix(rng, n, n);
    let h = &g * g.transpose() + Mat::identity(n, n) * 0.1;
    let f = Vector::from_column_slice(gaussian_matrix(rng, n, 1).as_slice()) * 2.0;
    let lower = Vector::from_fn(n, |_, _| rng.random_range(-1.5..0.0));
    let upper = Vector::from_fn(n, |i, _| lower[i] + rng.random_range(0.1..2.0));
    (h, f, lower, upper)
}

/// Random regular descriptor system with `m` inputs, `p` outputs and full
/// rank process and measurement noise.
pub fn random_system(rng: &mut impl Rng, n: usize, m: usize, p: usize) -> (DescriptorSystem, RandomPencil) {
    let pen = random_pencil(rng, n);
    let g = gaussian_matrix(rng, n, n);
    let q = &g * g.transpose() * (0.05 / n as f64);
    let r = Mat::identity(p, p) * 0.01;
    let sys = DescriptorSystem::new(
        pen.e.clone(),
        pen.a.clone(),
        gaussian_matrix(rng, n, m),
        gaussian_matrix(rng, p, n),
        gaussian_matrix(rng, p, m) * 0.5,
        q,
        r,
    )
    .expect("random system");
    (sys, pen)
}
