//! Brute-force reference implementations working straight from a count matrix.
#![allow(dead_code)]

/// Out- and in-degree by scanning the matrix.
pub fn degrees(m: &[Vec<u64>]) -> (Vec<u64>, Vec<u64>) {
    let n = m.len();
    let out = (0..n).map(|i| (0..n).filter(|&j| m[i][j] > 0).count() as u64).collect();
    let inn = (0..n).map(|j| (0..n).filter(|&i| m[i][j] > 0).count() as u64).collect();
    (out, inn)
}

pub fn strengths(m: &[Vec<u64>]) -> (Vec<u64>, Vec<u64>) {
    let n = m.len();
    let out = (0..n).map(|i| m[i].iter().sum()).collect();
    let inn = (0..n).map(|j| (0..n).map(|i| m[i][j]).sum()).collect();
    (out, inn)
}

/// Freeman centralization `sum (max - d) / (N - 1)^2`.
pub fn centralization(scores: &[u64]) -> f64 {
    let n = scores.len();
    if n < 2 {
        return 0.0;
    }
    let max = *scores.iter().max().unwrap();
    scores.iter().map(|&s| (max - s) as f64).sum::<f64>() / ((n - 1) * (n - 1)) as f64
}

/// All-pairs step distances by Floyd-Warshall; `None` when unreachable.
pub fn distances(m: &[Vec<u64>]) -> Vec<Vec<Option<usize>>> {
    let n = m.len();
    let mut d: Vec<Vec<Option<usize>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Some(0) } else if m[i][j] > 0 { Some(1) } else { None })
                .collect()
        })
        .collect();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|c| a + b < c) {
                        d[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    d
}

fn closeness_from(reached: usize, total: usize, n: usize) -> f64 {
    if reached == 0 {
        0.0
    } else {
        let r = reached as f64;
        (r / total as f64) * (r / (n - 1) as f64)
    }
}

/// Reachable-set closeness `(R / S) * (R / (N - 1))`: (out, in).
pub fn closeness(m: &[Vec<u64>]) -> (Vec<f64>, Vec<f64>) {
    let n = m.len();
    let d = distances(m);
    let score = |pick: &dyn Fn(usize, usize) -> Option<usize>, v: usize| {
        let ds: Vec<usize> = (0..n).filter(|&u| u != v).filter_map(|u| pick(v, u)).collect();
        closeness_from(ds.len(), ds.iter().sum(), n)
    };
    let out = (0..n).map(|v| score(&|v, u| d[v][u], v)).collect();
    let inn = (0..n).map(|v| score(&|v, u| d[u][v], v)).collect();
    (out, inn)
}

/// Every simple path from `s` to `t`, found by depth-first enumeration.
fn simple_paths(m: &[Vec<u64>], s: usize, t: usize) -> Vec<Vec<usize>> {
    fn walk(m: &[Vec<u64>], path: &mut Vec<usize>, t: usize, out: &mut Vec<Vec<usize>>) {
        let v = *path.last().unwrap();
        if v == t {
            out.push(path.clone());
            return;
        }
        for w in 0..m.len() {
            if m[v][w] > 0 && !path.contains(&w) {
                path.push(w);
                walk(m, path, t, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(m, &mut vec![s], t, &mut out);
    out
}

/// Raw betweenness by enumerating all shortest paths between every ordered pair.
pub fn betweenness(m: &[Vec<u64>]) -> Vec<f64> {
    let n = m.len();
    let mut score = vec![0.0; n];
    for s in 0..n {
        for t in 0..n {
            if s == t {
                continue;
            }
            let paths = simple_paths(m, s, t);
            let Some(shortest) = paths.iter().map(Vec::len).min() else {
                continue;
            };
            let geodesics: Vec<&Vec<usize>> = paths.iter().filter(|p| p.len() == shortest).collect();
            let total = geodesics.len() as f64;
            for v in 0..n {
                if v != s && v != t {
                    let through = geodesics.iter().filter(|p| p.contains(&v)).count();
                    score[v] += through as f64 / total;
                }
            }
        }
    }
    score
}

/// Min-max rescaling to `[0, 1]`; constant input maps to zeros.
pub fn unit_scale(xs: &[f64]) -> Vec<f64> {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return vec![0.0; xs.len()];
    }
    xs.iter().map(|x| (x - lo) / (hi - lo)).collect()
}

/// Newman modularity from the full symmetrized weight matrix `w = T + T'`.
pub fn modularity(m: &[Vec<u64>], labels: &[usize]) -> f64 {
    let n = m.len();
    let w = |i: usize, j: usize| (m[i][j] + m[j][i]) as f64;
    let k: Vec<f64> = (0..n).map(|i| (0..n).filter(|&j| j != i).map(|j| w(i, j)).sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                let a = if i == j { 0.0 } else { w(i, j) };
                q += a - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Visits every set partition of `0..n` as a restricted-growth label vector.
pub fn for_each_partition(n: usize, mut f: impl FnMut(&[usize])) {
    fn rec(labels: &mut Vec<usize>, n: usize, max: usize, f: &mut dyn FnMut(&[usize])) {
        if labels.len() == n {
            f(labels);
            return;
        }
        let top = if labels.is_empty() { 0 } else { max + 1 };
        for l in 0..=top {
            labels.push(l);
            rec(labels, n, max.max(l), f);
            labels.pop();
        }
    }
    rec(&mut Vec::with_capacity(n), n, 0, &mut f);
}

/// Best modularity over all partitions.
pub fn best_modularity(m: &[Vec<u64>]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for_each_partition(m.len(), |labels| best = best.max(modularity(m, labels)));
    best
}
