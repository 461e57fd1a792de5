//! Brute-force reference implementations used to cross-check the library.
#![allow(dead_code, clippy::type_complexity)]

use std::collections::{BTreeMap, VecDeque};

/// Bottleneck distance under the sup-norm, by enumerating every partial
/// matching. Unmatched points pay half their persistence.
pub fn bottleneck_bruteforce(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    fn diag(p: (f64, f64)) -> f64 {
        (p.1 - p.0) / 2.0
    }
    fn sup(p: (f64, f64), q: (f64, f64)) -> f64 {
        (p.0 - q.0).abs().max((p.1 - q.1).abs())
    }
    fn go(i: usize, a: &[(f64, f64)], b: &[(f64, f64)], used: &mut Vec<bool>, cost: f64, best: &mut f64) {
        if cost >= *best {
            return;
        }
        if i == a.len() {
            let rest = b
                .iter()
                .zip(used.iter())
                .filter(|(_, u)| !**u)
                .map(|(p, _)| diag(*p))
                .fold(cost, f64::max);
            *best = best.min(rest);
            return;
        }
        go(i + 1, a, b, used, cost.max(diag(a[i])), best);
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                go(i + 1, a, b, used, cost.max(sup(a[i], b[j])), best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(0, a, b, &mut vec![false; b.len()], 0.0, &mut best);
    best
}

/// Vietoris–Rips persistence in degrees 0 and 1 by dense column reduction
/// of the full boundary matrix, with essential classes capped at the
/// largest filtration value. Returns sorted `(birth, death)` lists.
pub fn vr_bruteforce(dm: &[Vec<f64>]) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let n = dm.len();
    let mut simplices: Vec<(f64, Vec<usize>)> = (0..n).map(|v| (0.0, vec![v])).collect();
    for i in 0..n {
        for j in i + 1..n {
            simplices.push((dm[i][j], vec![i, j]));
            for k in j + 1..n {
                simplices.push((dm[i][j].max(dm[i][k]).max(dm[j][k]), vec![i, j, k]));
            }
        }
    }
    simplices.sort_by(|x, y| {
        x.0.partial_cmp(&y.0)
            .unwrap()
            .then(x.1.len().cmp(&y.1.len()))
            .then(x.1.cmp(&y.1))
    });
    let index: BTreeMap<Vec<usize>, usize> = simplices.iter().enumerate().map(|(i, s)| (s.1.clone(), i)).collect();
    let m = simplices.len();
    let mut matrix = vec![vec![false; m]; m];
    for (j, (_, verts)) in simplices.iter().enumerate() {
        if verts.len() > 1 {
            for skip in 0..verts.len() {
                let mut face = verts.clone();
                face.remove(skip);
                matrix[j][index[&face]] = true;
            }
        }
    }
    let low = |col: &Vec<bool>| col.iter().rposition(|&x| x);
    let mut pivots: Vec<Option<usize>> = vec![None; m];
    for j in 0..m {
        while let Some(k) = low(&matrix[j]).and_then(|l| pivots[l]) {
            let other = matrix[k].clone();
            for (x, y) in matrix[j].iter_mut().zip(other) {
                *x ^= y;
            }
        }
        if let Some(l) = low(&matrix[j]) {
            pivots[l] = Some(j);
        }
    }
    let cap = simplices.iter().map(|s| s.0).fold(0.0, f64::max);
    let (mut h0, mut h1) = (Vec::new(), Vec::new());
    for i in 0..m {
        let dim = simplices[i].1.len() - 1;
        if dim > 1 || low(&matrix[i]).is_some() {
            continue;
        }
        let death = pivots[i].map_or(cap, |j| simplices[j].0);
        let birth = simplices[i].0;
        if birth < death {
            if dim == 0 {
                h0.push((birth, death));
            } else {
                h1.push((birth, death));
            }
        }
    }
    h0.sort_by(|a, b| a.partial_cmp(b).unwrap());
    h1.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (h0, h1)
}

/// Sublevel-set H0 of an image by flood-filling every sublevel set. A
/// component alive at one level dies at the next level where its component
/// holds an older minimum. Survivors are capped at the maximum intensity.
pub fn image_h0_bruteforce(w: usize, h: usize, px: &[f64], eight: bool) -> Vec<(f64, f64)> {
    let mut levels: Vec<f64> = px.to_vec();
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    levels.dedup();
    let key = |i: usize| (px[i], i);
    let label = |level: f64| -> Vec<Option<usize>> {
        // Each pixel gets the index of its component's oldest pixel.
        let mut comp: Vec<Option<usize>> = vec![None; px.len()];
        for start in 0..px.len() {
            if px[start] > level || comp[start].is_some() {
                continue;
            }
            let mut members = vec![start];
            let mut queue = VecDeque::from([start]);
            comp[start] = Some(usize::MAX);
            while let Some(p) = queue.pop_front() {
                let (x, y) = ((p % w) as i64, (p / w) as i64);
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        if (dx, dy) == (0, 0) || (!eight && dx != 0 && dy != 0) {
                            continue;
                        }
                        let (nx, ny) = (x + dx, y + dy);
                        if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                            continue;
                        }
                        let q = ny as usize * w + nx as usize;
                        if px[q] <= level && comp[q].is_none() {
                            comp[q] = Some(usize::MAX);
                            members.push(q);
                            queue.push_back(q);
                        }
                    }
                }
            }
            let oldest = *members
                .iter()
                .min_by(|&&a, &&b| key(a).partial_cmp(&key(b)).unwrap())
                .unwrap();
            for &q in &members {
                comp[q] = Some(oldest);
            }
        }
        comp
    };
    let mut out = Vec::new();
    let mut prev = label(levels[0]);
    for &level in &levels[1..] {
        let cur = label(level);
        let mut roots: Vec<usize> = prev.iter().flatten().copied().collect();
        roots.sort_unstable();
        roots.dedup();
        for r in roots {
            if cur[r] != Some(r) && px[r] < level {
                out.push((px[r], level));
            }
        }
        prev = cur;
    }
    let cap = levels[levels.len() - 1];
    let mut roots: Vec<usize> = prev.iter().flatten().copied().collect();
    roots.sort_unstable();
    roots.dedup();
    for r in roots {
        if px[r] < cap {
            out.push((px[r], cap));
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

/// Midpoint-rule value of `∫ 1_B(u) K_A(x − u) du` on a `res × res` grid over `B`.
pub fn step_convolution_quadrature(a: [f64; 4], b: [f64; 4], x: [f64; 2], res: usize) -> f64 {
    let area_a = (a[1] - a[0]) * (a[3] - a[2]);
    let (hx, hy) = ((b[1] - b[0]) / res as f64, (b[3] - b[2]) / res as f64);
    let mut hits = 0usize;
    for i in 0..res {
        let u0 = b[0] + (i as f64 + 0.5) * hx;
        for j in 0..res {
            let u1 = b[2] + (j as f64 + 0.5) * hy;
            let (v0, v1) = (x[0] - u0, x[1] - u1);
            if v0 >= a[0] && v0 <= a[1] && v1 >= a[2] && v1 <= a[3] {
                hits += 1;
            }
        }
    }
    hits as f64 * hx * hy / area_a
}
