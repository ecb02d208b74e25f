//! Helpers shared by the integration and acceptance targets.

use std::f64::consts::PI;

use emlab::dualmaxwell::{location, Placement};
use emlab::{GridSpec, Vec3};

/// Plain single-lattice staggered stepper without any magnetic terms.
pub fn reference_step(e: &mut [Vec3], hf: &mut [Vec3], spec: &GridSpec, dt: f64, je: &dyn Fn(Vec3, f64) -> Vec3, t: f64) {
    let (h, a) = (spec.h(), spec.c() * dt);
    let n = spec.len();
    let nb = |i: usize, axis: usize, o: isize| spec.shifted(i, axis, o);
    let curl_e: Vec<Vec3> = (0..n)
        .map(|i| {
            let (xp, yp, zp) = (nb(i, 0, 1), nb(i, 1, 1), nb(i, 2, 1));
            [
                (e[yp][2] - e[i][2] - e[zp][1] + e[i][1]) / h,
                (e[zp][0] - e[i][0] - e[xp][2] + e[i][2]) / h,
                (e[xp][1] - e[i][1] - e[yp][0] + e[i][0]) / h,
            ]
        })
        .collect();
    for i in 0..n {
        hf[i] = [hf[i][0] - a * curl_e[i][0], hf[i][1] - a * curl_e[i][1], hf[i][2] - a * curl_e[i][2]];
    }
    let curl_h: Vec<Vec3> = (0..n)
        .map(|i| {
            let (xm, ym, zm) = (nb(i, 0, -1), nb(i, 1, -1), nb(i, 2, -1));
            [
                (hf[i][2] - hf[ym][2] - hf[i][1] + hf[zm][1]) / h,
                (hf[i][0] - hf[zm][0] - hf[i][2] + hf[xm][2]) / h,
                (hf[i][1] - hf[xm][1] - hf[i][0] + hf[ym][0]) / h,
            ]
        })
        .collect();
    let w = 4.0 * PI * dt;
    for i in 0..n {
        e[i] = [e[i][0] + a * curl_h[i][0], e[i][1] + a * curl_h[i][1], e[i][2] + a * curl_h[i][2]];
        let j = [0, 1, 2].map(|c| je(location(spec, i, Placement::Edge, c), t + 0.5 * dt)[c]);
        for c in 0..3 {
            e[i][c] -= w * j[c];
        }
    }
}

