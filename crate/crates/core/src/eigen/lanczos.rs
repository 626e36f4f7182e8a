//! Thick-restart block Lanczos with full reorthogonalization.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{axpy, combine, dot, nrm2, orthogonalize, scale};
use crate::state::{to_dense, LinearOperator};

/// End of the spectrum to converge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Which {
    Lowest,
    Largest,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenOptions {
    /// Number of eigenpairs wanted.
    pub nev: usize,
    /// Residual tolerance `‖Av − θv‖`.
    pub tol: f64,
    pub block_size: usize,
    /// Largest subspace before a restart; 0 picks a default.
    pub max_basis: usize,
    pub max_restarts: usize,
    pub seed: u64,
    pub which: Which,
}

impl EigenOptions {
    pub fn lowest(nev: usize, tol: f64) -> Self {
        Self {
            nev,
            tol,
            block_size: nev.clamp(1, 4),
            max_basis: 0,
            max_restarts: 500,
            seed: 0x5eed,
            which: Which::Lowest,
        }
    }
}

/// Real eigenpairs without a basis attached.
#[derive(Clone, Debug)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub matvecs: usize,
}

/// Below this dimension the operator is diagonalized densely.
const DENSE_CUTOFF: usize = 160;

struct Krylov<'a> {
    op: &'a dyn LinearOperator,
    v: Vec<Vec<f64>>,
    av: Vec<Vec<f64>>,
    t: Vec<Vec<f64>>,
    rng: ChaCha8Rng,
    matvecs: usize,
}

impl<'a> Krylov<'a> {
    fn random_vector(&mut self) -> Vec<f64> {
        (0..self.op.dim()).map(|_| self.rng.gen_range(-1.0..1.0)).collect()
    }

    /// Orthonormalizes candidates against the basis, appends up to
    /// `count` of them (filling with random directions) and applies the
    /// operator to the new vectors.
    fn extend(&mut self, mut candidates: Vec<Vec<f64>>, count: usize) {
        candidates.sort_by(|a, b| nrm2(b).total_cmp(&nrm2(a)));
        let start = self.v.len();
        let mut added = 0;
        let mut tries = 0;
        let mut iter = candidates.into_iter();
        while added < count && self.v.len() < self.op.dim() {
            let mut c = match iter.next() {
                Some(c) => c,
                None => {
                    tries += 1;
                    if tries > 20 * count + 20 {
                        break;
                    }
                    self.random_vector()
                }
            };
            let before = nrm2(&c);
            if before == 0.0 {
                continue;
            }
            let after = orthogonalize(&self.v, &mut c);
            if after <= 1e-8 * before || after < 1e-300 {
                continue;
            }
            scale(1.0 / after, &mut c);
            self.v.push(c);
            added += 1;
        }
        let n = self.op.dim();
        for j in start..self.v.len() {
            let mut w = vec![0.0; n];
            self.op.apply(&self.v[j], &mut w);
            self.matvecs += 1;
            self.av.push(w);
        }
        // Projected matrix rows and columns for the new vectors.
        let m = self.v.len();
        for row in &mut self.t {
            row.resize(m, 0.0);
        }
        self.t.resize(m, vec![0.0; m]);
        for j in start..m {
            for i in 0..=j {
                let x = 0.5 * (dot(&self.v[i], &self.av[j]) + dot(&self.v[j], &self.av[i]));
                self.t[i][j] = x;
                self.t[j][i] = x;
            }
        }
    }

    fn ritz(&self, which: Which) -> (Vec<f64>, Vec<Vec<f64>>) {
        let m = self.v.len();
        let t = DMatrix::from_fn(m, m, |i, j| self.t[i][j]);
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..m).collect();
        match which {
            Which::Lowest => order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b])),
            Which::Largest => order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a])),
        }
        let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vecs = order.iter().map(|&k| eig.eigenvectors.column(k).iter().copied().collect()).collect();
        (vals, vecs)
    }

    fn residual(&self, theta: f64, s: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let y = combine(&self.v, s);
        let ay = combine(&self.av, s);
        let mut r = ay.clone();
        axpy(-theta, &y, &mut r);
        (y, ay, r)
    }
}

/// Eigenpairs at one end of the spectrum of a symmetric operator.
///
/// `start` vectors seed the first block (warm start); the rest of the
/// block is filled from a seeded generator, so runs are reproducible.
pub fn block_lanczos(op: &dyn LinearOperator, opts: &EigenOptions, start: &[Vec<f64>]) -> Result<Eigenpairs> {
    let n = op.dim();
    let k = opts.nev;
    if k == 0 {
        return Err(invalid("nev", "need at least one eigenpair"));
    }
    if k > n {
        return Err(invalid("nev", format!("{k} eigenpairs requested from a {n}-dimensional operator")));
    }
    if start.iter().any(|s| s.len() != n) {
        return Err(Error::Dimension { expected: n, found: start.iter().map(Vec::len).find(|&l| l != n).unwrap() });
    }
    if n <= DENSE_CUTOFF {
        return dense_pairs(op, k, opts.which);
    }
    let b = opts.block_size.clamp(1, n);
    let mut m = if opts.max_basis > 0 { opts.max_basis } else { (3 * k + 4 * b).max(30) };
    m = m.min(n).max(k + b);
    let keep = (k + (m - k) / 2).min(m - b).max(k);

    let mut kr = Krylov {
        op,
        v: Vec::with_capacity(m),
        av: Vec::with_capacity(m),
        t: Vec::new(),
        rng: ChaCha8Rng::seed_from_u64(opts.seed),
        matvecs: 0,
    };
    let first = start.len().min(m - b).max(b);
    kr.extend(start.to_vec(), first);

    for restart in 0..=opts.max_restarts {
        loop {
            if kr.v.len() >= k {
                let (theta, s) = kr.ritz(opts.which);
                let mut res = Vec::with_capacity(k);
                let mut done = true;
                for i in 0..k {
                    let (_, _, r) = kr.residual(theta[i], &s[i]);
                    let rn = nrm2(&r);
                    done &= rn <= opts.tol;
                    res.push(rn);
                }
                if done || kr.v.len() == n {
                    return Ok(finish(&kr, &theta, &s, k, restart, opts.which));
                }
                if restart == opts.max_restarts && kr.v.len() + b > m {
                    let worst = res.iter().cloned().fold(0.0, f64::max);
                    return Err(Error::NoConvergence { iterations: restart, worst, residuals: res });
                }
            }
            if kr.v.len() + b > m {
                break;
            }
            let last = kr.v.len().saturating_sub(b);
            let cands: Vec<Vec<f64>> = kr.av[last..].to_vec();
            let before = kr.v.len();
            kr.extend(cands, b);
            if kr.v.len() == before {
                // Only possible once the whole space is spanned.
                break;
            }
        }
        // Thick restart on the leading Ritz vectors.
        let (theta, s) = kr.ritz(opts.which);
        let mut v = Vec::with_capacity(m);
        let mut av = Vec::with_capacity(m);
        let mut resid = Vec::with_capacity(keep);
        for i in 0..keep.min(theta.len()) {
            let (y, ay, r) = kr.residual(theta[i], &s[i]);
            v.push(y);
            av.push(ay);
            resid.push(r);
        }
        let kk = v.len();
        kr.v = v;
        kr.av = av;
        kr.t = (0..kk)
            .map(|i| (0..kk).map(|j| if i == j { theta[i] } else { 0.0 }).collect())
            .collect();
        kr.extend(resid, b);
    }
    unreachable!("restart loop returns")
}

fn finish(kr: &Krylov, theta: &[f64], s: &[Vec<f64>], k: usize, restarts: usize, which: Which) -> Eigenpairs {
    let mut values = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for i in 0..k {
        let (y, _, r) = kr.residual(theta[i], &s[i]);
        values.push(theta[i]);
        vectors.push(y);
        residuals.push(nrm2(&r));
    }
    let mut out = Eigenpairs { values, vectors, residuals, iterations: restarts, matvecs: kr.matvecs };
    canonicalize(&mut out, which);
    out
}

fn dense_pairs(op: &dyn LinearOperator, k: usize, which: Which) -> Result<Eigenpairs> {
    let a = to_dense(op);
    let n = a.nrows();
    let a = 0.5 * (&a + a.transpose());
    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..n).collect();
    match which {
        Which::Lowest => order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y])),
        Which::Largest => order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x])),
    }
    let mut values = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for &j in order.iter().take(k) {
        let v: Vec<f64> = eig.eigenvectors.column(j).iter().copied().collect();
        let mut r = vec![0.0; n];
        op.apply(&v, &mut r);
        axpy(-eig.eigenvalues[j], &v, &mut r);
        values.push(eig.eigenvalues[j]);
        vectors.push(v);
        residuals.push(nrm2(&r));
    }
    let mut out = Eigenpairs { values, vectors, residuals, iterations: 0, matvecs: n };
    canonicalize(&mut out, which);
    Ok(out)
}

/// Sorts pairs, breaking near-degenerate ties by the dominant basis index,
/// and fixes each sign so the dominant component is positive.
pub(crate) fn canonicalize(p: &mut Eigenpairs, which: Which) {
    let k = p.values.len();
    let dominant: Vec<usize> = p
        .vectors
        .iter()
        .map(|v| {
            v.iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .map_or(0, |(i, _)| i)
        })
        .collect();
    let mut order: Vec<usize> = (0..k).collect();
    match which {
        Which::Lowest => order.sort_by(|&a, &b| p.values[a].total_cmp(&p.values[b])),
        Which::Largest => order.sort_by(|&a, &b| p.values[b].total_cmp(&p.values[a])),
    }
    // Group numerically degenerate runs and order each run by index.
    let mut i = 0;
    while i < k {
        let mut j = i + 1;
        while j < k {
            let (a, b) = (p.values[order[j - 1]], p.values[order[j]]);
            if (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
                break;
            }
            j += 1;
        }
        order[i..j].sort_by_key(|&x| dominant[x]);
        i = j;
    }
    p.values = order.iter().map(|&i| p.values[i]).collect();
    p.residuals = order.iter().map(|&i| p.residuals[i]).collect();
    let mut vectors: Vec<Vec<f64>> = order.iter().map(|&i| std::mem::take(&mut p.vectors[i])).collect();
    for (v, &i) in vectors.iter_mut().zip(&order) {
        if v[dominant[i]] < 0.0 {
            scale(-1.0, v);
        }
    }
    p.vectors = vectors;
}
