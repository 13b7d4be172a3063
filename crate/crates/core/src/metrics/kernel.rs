//! Weighted pairwise overlap sums `Σ_{b≠a} w_b |<a|b>|^{2K}`.
//!
//! Two evaluation routes give the same numbers up to rounding: a tiled Gram
//! pass (cost `~m² d`, all orders at once) and a symmetric-subspace moment
//! pass (cost `~m D_K²` per order with `D_K = C(d+K-1, K)`). The cheaper one
//! is picked per order. Both are deterministic for any thread count.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::quantum::StateVector;
use crate::C64;

const TILE: usize = 1024;

/// Row sums per requested order: `rows[i][a] = Σ_{b≠a} w_b g_ab^{ks[i]}`.
pub(crate) struct PairSums {
    pub rows: Vec<Vec<f64>>,
}

pub(crate) fn pair_sums(states: &[StateVector], w: &[f64], ks: &[u32]) -> PairSums {
    let m = states.len();
    let d = states.first().map_or(1, StateVector::dim);
    let pair_cost = 2.0 * (m as f64).powi(2) * d as f64;
    let mut rows: Vec<Option<Vec<f64>>> = vec![None; ks.len()];
    let mut need_pairs = Vec::new();
    for (i, &k) in ks.iter().enumerate() {
        let dk = sym_dim(d, k as usize);
        let moment_cost = 8.0 * m as f64 * dk * dk;
        if moment_cost < pair_cost && dk <= 4096.0 {
            rows[i] = Some(moment_rows(states, w, k as usize));
        } else {
            need_pairs.push(i);
        }
    }
    if !need_pairs.is_empty() {
        let sub: Vec<u32> = need_pairs.iter().map(|&i| ks[i]).collect();
        let computed = gram_rows(states, w, &sub);
        for (i, r) in need_pairs.into_iter().zip(computed) {
            rows[i] = Some(r);
        }
    }
    PairSums {
        rows: rows
            .into_iter()
            .map(|r| r.expect("every order evaluated"))
            .collect(),
    }
}

fn sym_dim(d: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (d + i) as f64 / (i + 1) as f64)
}

/// Real embedding of states: row `a` holds `[Re ψ_a, Im ψ_a]`.
fn real_rows(states: &[StateVector]) -> DMatrix<f64> {
    let d = states[0].dim();
    DMatrix::from_fn(states.len(), 2 * d, |a, j| {
        let z = states[a].amplitudes()[j % d];
        if j < d {
            z.re
        } else {
            z.im
        }
    })
}

fn gram_rows(states: &[StateVector], w: &[f64], ks: &[u32]) -> Vec<Vec<f64>> {
    let m = states.len();
    let nk = ks.len();
    let kmax = *ks.iter().max().expect("non-empty orders") as usize;
    let mut slot = vec![usize::MAX; kmax + 1];
    for (i, &k) in ks.iter().enumerate() {
        slot[k as usize] = i;
    }
    let x = real_rows(states);
    let d2 = x.ncols();
    let d = d2 / 2;
    let starts: Vec<usize> = (0..m).step_by(TILE).collect();

    let partials: Vec<Vec<f64>> = starts
        .par_iter()
        .map(|&i0| {
            let bi = TILE.min(m - i0);
            let xi = x.rows(i0, bi).into_owned();
            let wi = &w[i0..i0 + bi];
            // Contributions for indices i0.., laid out [order][index - i0].
            let span = m - i0;
            let mut acc = vec![0.0; nk * span];
            let mut c = DMatrix::<f64>::zeros(bi, 2 * TILE);
            let mut g = vec![0.0; bi];
            let mut pw = vec![0.0; bi];
            for j0 in (i0..m).step_by(TILE) {
                let bj = TILE.min(m - j0);
                // Columns 0..bj give Re<a|b>, columns bj..2bj give Im<a|b>.
                let bt = DMatrix::from_fn(d2, 2 * bj, |r, col| {
                    if col < bj {
                        x[(j0 + col, r)]
                    } else if r < d {
                        x[(j0 + col - bj, r + d)]
                    } else {
                        -x[(j0 + col - bj, r - d)]
                    }
                });
                c.columns_mut(0, 2 * bj).gemm(1.0, &xi, &bt, 0.0);
                let cs = c.as_slice();
                for b in 0..bj {
                    // Rows a < b only on the diagonal tile.
                    let rows = if j0 == i0 { b } else { bi };
                    if rows == 0 {
                        continue;
                    }
                    let re = &cs[b * bi..b * bi + rows];
                    let im = &cs[(b + bj) * bi..(b + bj) * bi + rows];
                    for ((gv, r), i) in g.iter_mut().zip(re).zip(im) {
                        *gv = r * r + i * i;
                    }
                    pw[..rows].fill(1.0);
                    let gb = j0 + b;
                    let wb = w[gb];
                    for &s in slot.iter().skip(1) {
                        for (p, gv) in pw[..rows].iter_mut().zip(&g) {
                            *p *= gv;
                        }
                        if s == usize::MAX {
                            continue;
                        }
                        let row_acc = &mut acc[s * span..s * span + bi];
                        for (ra, p) in row_acc.iter_mut().zip(&pw[..rows]) {
                            *ra += wb * p;
                        }
                        acc[s * span + gb - i0] += dot4(&wi[..rows], &pw[..rows]);
                    }
                }
            }
            acc
        })
        .collect();

    let mut rows = vec![vec![0.0; m]; nk];
    for (&i0, acc) in starts.iter().zip(&partials) {
        let span = m - i0;
        for (s, row) in rows.iter_mut().enumerate() {
            for (t, v) in acc[s * span..(s + 1) * span].iter().enumerate() {
                row[i0 + t] += v;
            }
        }
    }
    rows
}

/// Dot product with four interleaved accumulators.
fn dot4(a: &[f64], b: &[f64]) -> f64 {
    let mut s = [0.0; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            s[l] += x[l] * y[l];
        }
    }
    (s[0] + s[1]) + (s[2] + s[3]) + tail
}

/// Sorted index tuples `i_1 ≤ … ≤ i_K` with the weight `sqrt(K!/Π n_i!)`.
fn symmetric_basis(d: usize, k: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut idx = vec![0usize; k];
    let kfact: f64 = (1..=k).map(|i| i as f64).product();
    loop {
        let mut denom = 1.0;
        let mut run = 1usize;
        for j in 1..=k {
            if j < k && idx[j] == idx[j - 1] {
                run += 1;
            } else {
                denom *= (1..=run).map(|i| i as f64).product::<f64>();
                run = 1;
            }
        }
        out.push((idx.clone(), (kfact / denom).sqrt()));
        // Next non-decreasing tuple.
        let mut pos = k;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if idx[pos] + 1 < d {
                let v = idx[pos] + 1;
                for slot in idx.iter_mut().skip(pos) {
                    *slot = v;
                }
                break;
            }
        }
    }
}

fn moment_rows(states: &[StateVector], w: &[f64], k: usize) -> Vec<f64> {
    let m = states.len();
    let d = states[0].dim();
    let basis = symmetric_basis(d, k);
    let dk = basis.len();
    let mut r = DMatrix::<f64>::zeros(m, 2 * dk);
    for (a, s) in states.iter().enumerate() {
        let amps = s.amplitudes();
        for (j, (tuple, coef)) in basis.iter().enumerate() {
            let v = tuple
                .iter()
                .fold(C64::new(*coef, 0.0), |acc, &i| acc * amps[i]);
            r[(a, j)] = v.re;
            r[(a, j + dk)] = v.im;
        }
    }
    let mut rw = r.clone();
    for (a, &wa) in w.iter().enumerate() {
        rw.row_mut(a).scale_mut(wa);
    }
    let q = r.transpose() * &rw;
    let mut mreal = DMatrix::<f64>::zeros(2 * dk, 2 * dk);
    for i in 0..dk {
        for j in 0..dk {
            let re = q[(i, j)] + q[(i + dk, j + dk)];
            let im = q[(i + dk, j)] - q[(i, j + dk)];
            mreal[(i, j)] = re;
            mreal[(i + dk, j + dk)] = re;
            mreal[(i, j + dk)] = -im;
            mreal[(i + dk, j)] = im;
        }
    }
    let y = &r * &mreal;
    (0..m).map(|a| r.row(a).dot(&y.row(a)) - w[a]).collect()
}
