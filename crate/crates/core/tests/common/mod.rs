#![allow(dead_code)]

use std::path::PathBuf;

use motion_camouflage::scenario::ScenarioConfig;
use motion_camouflage::Vec3;

pub fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

pub fn bundled() -> Vec<PathBuf> {
    let mut files: Vec<_> = std::fs::read_dir(scenario_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    files
}

pub fn load(stem: &str) -> ScenarioConfig {
    ScenarioConfig::from_path(scenario_dir().join(format!("{stem}.json"))).unwrap()
}

/// Brute-force minimiser of the discretised energy
/// `J = 1/(2h) Σ ‖k_i α_i − k_{i−1} α_{i−1}‖²` with `k` pinned at both ends,
/// by conjugate gradients on the normal equations. Returns `(k, J)`.
pub fn grid_minimiser(alpha: &[Vec3], h: f64, k_first: f64, k_last: f64) -> (Vec<f64>, f64) {
    let n = alpha.len();
    let m = n - 2;
    // tridiagonal Hessian (times h) on the interior unknowns
    let diag: Vec<f64> = (1..n - 1).map(|i| 2.0 * alpha[i].norm_squared()).collect();
    let off: Vec<f64> = (1..n - 2).map(|i| -alpha[i].dot(&alpha[i + 1])).collect();
    let mut b = vec![0.0; m];
    b[0] = alpha[0].dot(&alpha[1]) * k_first;
    b[m - 1] += alpha[n - 1].dot(&alpha[n - 2]) * k_last;
    let apply = |x: &[f64]| -> Vec<f64> {
        (0..m)
            .map(|i| {
                let mut y = diag[i] * x[i];
                if i > 0 {
                    y += off[i - 1] * x[i - 1];
                }
                if i + 1 < m {
                    y += off[i] * x[i + 1];
                }
                y
            })
            .collect()
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut x = vec![k_first; m];
    let ax = apply(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut d = r.clone();
    let mut rr = dot(&r, &r);
    let scale = dot(&b, &b).sqrt();
    for _ in 0..20 * m {
        if rr.sqrt() <= 1e-14 * scale {
            break;
        }
        let ad = apply(&d);
        let step = rr / dot(&d, &ad);
        for i in 0..m {
            x[i] += step * d[i];
            r[i] -= step * ad[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for i in 0..m {
            d[i] = r[i] + beta * d[i];
        }
        rr = rr_new;
    }
    let mut k = Vec::with_capacity(n);
    k.push(k_first);
    k.extend(x);
    k.push(k_last);
    let j = (1..n)
        .map(|i| (k[i] * alpha[i] - k[i - 1] * alpha[i - 1]).norm_squared())
        .sum::<f64>()
        / (2.0 * h);
    (k, j)
}
