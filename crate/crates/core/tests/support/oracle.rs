//! Brute-force reference implementations and random inputs for them.
//! Shared with the acceptance suite of the cli crate.

use pdc_core::spgraph::{
    build_adjacency, build_regions, cost, distance, epsilon, select_set, CostMode, MatchParams,
    RegionTable,
};
use pdc_core::{evaluate, DepthMap, GrayImage, Labeling};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_labeling(rng: &mut ChaCha8Rng) -> (Labeling, GrayImage) {
    let w = rng.gen_range(1..=12);
    let h = rng.gen_range(1..=12);
    let k = rng.gen_range(1..=8u32);
    // blobs grown from random seeds keep most regions connected, with a few
    // stray pixels to exercise disconnected regions too
    let seeds: Vec<(usize, usize)> = (0..k).map(|_| (rng.gen_range(0..w), rng.gen_range(0..h))).collect();
    let raw: Vec<u32> = (0..w * h)
        .map(|p| {
            if rng.gen_bool(0.05) {
                return rng.gen_range(0..k);
            }
            let (x, y) = (p % w, p / w);
            (0..k)
                .min_by_key(|&i| {
                    let (sx, sy) = seeds[i as usize];
                    x.abs_diff(sx).pow(2) + y.abs_diff(sy).pow(2)
                })
                .unwrap()
        })
        .collect();
    let lab = Labeling::compacted(w, h, &raw).unwrap();
    let levels: Vec<u8> = (0..lab.count()).map(|_| rng.gen()).collect();
    let gray = (0..w * h)
        .map(|p| levels[lab.as_slice()[p] as usize].saturating_add(rng.gen_range(0..12)))
        .collect();
    (lab, GrayImage::from_values(w, h, gray).unwrap())
}

fn centers(lab: &Labeling) -> Vec<(usize, usize)> {
    let w = lab.width() as i128;
    (0..lab.count())
        .map(|r| {
            let pix: Vec<i128> = (0..lab.as_slice().len() as i128)
                .filter(|&p| lab.as_slice()[p as usize] as usize == r)
                .collect();
            let n = pix.len() as i128;
            let sx: i128 = pix.iter().map(|p| p % w).sum();
            let sy: i128 = pix.iter().map(|p| p / w).sum();
            // n^2 times the squared distance to the centroid, in integers
            let key = |p: &i128| ((n * (p % w) - sx).pow(2) + (n * (p / w) - sy).pow(2), p / w, p % w);
            let best = pix.iter().min_by_key(|p| key(p)).unwrap();
            ((best % w) as usize, (best / w) as usize)
        })
        .collect()
}

fn ref_adjacency(lab: &Labeling) -> Vec<Vec<bool>> {
    let (w, h) = lab.dims();
    let k = lab.count();
    let mut adj = vec![vec![false; k]; k];
    for p in 0..w * h {
        for q in 0..w * h {
            let (px, py, qx, qy) = (p % w, p / w, q % w, q / w);
            if px.abs_diff(qx) + py.abs_diff(qy) == 1 {
                let (a, b) = (lab.as_slice()[p] as usize, lab.as_slice()[q] as usize);
                if a != b {
                    adj[a][b] = true;
                }
            }
        }
    }
    adj
}

fn ref_epsilon(a: &[u8], b: &[u8]) -> f64 {
    let n = a.len().min(b.len());
    let pick = |s: &[u8], k: usize| -> i64 {
        if n == 1 {
            return i64::from(s[(s.len() - 1) / 2]);
        }
        let idx = (k as f64 * (s.len() - 1) as f64 / (n - 1) as f64).round() as usize;
        i64::from(s[idx])
    };
    let total: i64 = (0..n).map(|k| (pick(a, k) - pick(b, k)).abs()).sum();
    total as f64 / n as f64
}

fn ref_cost(d: f64, eps: f64, alpha: f64, mode: CostMode) -> f64 {
    let w = match mode {
        CostMode::PenalizeDistance => (d / alpha).exp(),
        CostMode::AsWritten => (-d / alpha).exp(),
    };
    w * eps
}

/// Compares the graph stage on one labeling against the references.
/// Returns a description of the first mismatch.
pub fn check_graph_case(lab: &Labeling, gray: &GrayImage, params: &MatchParams) -> Result<(), String> {
    let k = lab.count();
    let table: RegionTable = build_regions(lab, gray).map_err(|e| e.to_string())?;
    let ref_centers = centers(lab);
    let mut ref_gray: Vec<Vec<u8>> = vec![Vec::new(); k];
    for (p, &l) in lab.as_slice().iter().enumerate() {
        ref_gray[l as usize].push(gray.as_slice()[p]);
    }
    for g in &mut ref_gray {
        g.sort_unstable();
    }
    for r in 0..k {
        let s = table.get(r);
        if s.center != ref_centers[r] {
            return Err(format!("center of {r}: {:?} vs {:?}", s.center, ref_centers[r]));
        }
        if s.gray != ref_gray[r] || s.size != ref_gray[r].len() {
            return Err(format!("gray sequence of {r}"));
        }
    }

    let graph = build_adjacency(lab);
    let adj = ref_adjacency(lab);
    for i in 0..k {
        for j in 0..k {
            if graph.has_edge(i, j) != adj[i][j] {
                return Err(format!("edge {i}-{j}"));
            }
        }
        let mut listed = graph.neighbors(i).to_vec();
        listed.sort_unstable();
        let expected: Vec<usize> = (0..k).filter(|&j| adj[i][j]).collect();
        if listed != expected {
            return Err(format!("neighbor list of {i}"));
        }
    }

    for i in 0..k {
        for j in 0..k {
            let (a, b) = (ref_centers[i], ref_centers[j]);
            let dx = a.0 as f64 - b.0 as f64;
            let dy = a.1 as f64 - b.1 as f64;
            let d = (dx * dx + dy * dy).sqrt();
            if distance(&table, i, j) != d {
                return Err(format!("D({i},{j})"));
            }
            let e = ref_epsilon(&ref_gray[i], &ref_gray[j]);
            if epsilon(&table, i, j) != e {
                return Err(format!("epsilon({i},{j}): {} vs {e}", epsilon(&table, i, j)));
            }
            for mode in [CostMode::PenalizeDistance, CostMode::AsWritten] {
                if cost(&table, i, j, params.alpha, mode) != ref_cost(d, e, params.alpha, mode) {
                    return Err(format!("cost({i},{j}) in {mode}"));
                }
            }
        }

        let mut short: Vec<(f64, usize)> = (0..k)
            .filter(|&j| adj[i][j])
            .filter_map(|j| {
                let e = ref_epsilon(&ref_gray[i], &ref_gray[j]);
                let (a, b) = (ref_centers[i], ref_centers[j]);
                let d = ((a.0 as f64 - b.0 as f64).powi(2) + (a.1 as f64 - b.1 as f64).powi(2)).sqrt();
                (e <= params.tau).then(|| (ref_cost(d, e, params.alpha, params.cost_mode), j))
            })
            .collect();
        short.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        short.truncate(params.set_size);
        let set = select_set(&graph, &table, i, params);
        let got: Vec<(f64, usize)> = set.neighbors.iter().map(|n| (n.cost, n.region)).collect();
        if set.center != i || got != short {
            return Err(format!("select_set({i}): {got:?} vs {short:?}"));
        }
    }
    Ok(())
}

pub fn random_match_params(rng: &mut ChaCha8Rng) -> MatchParams {
    MatchParams {
        tau: rng.gen_range(1.0..80.0),
        alpha: rng.gen_range(0.5..20.0),
        set_size: rng.gen_range(0..=4),
        cost_mode: if rng.gen_bool(0.5) {
            CostMode::PenalizeDistance
        } else {
            CostMode::AsWritten
        },
    }
}

/// Runs `cases` random labelings starting from `seed`.
pub fn graph_equivalence(seed: u64, cases: usize) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let (lab, gray) = random_labeling(&mut rng);
        let params = random_match_params(&mut rng);
        check_graph_case(&lab, &gray, &params).map_err(|e| format!("case {case}: {e}"))?;
    }
    Ok(())
}

pub fn random_depth_pair(rng: &mut ChaCha8Rng, w: usize, h: usize) -> (DepthMap, DepthMap) {
    let mut gen = |invalid: f64| -> DepthMap {
        let d = (0..w * h)
            .map(|_| if rng.gen_bool(invalid) { 0.0 } else { rng.gen_range(0.5f32..90.0) })
            .collect();
        DepthMap::from_depths(w, h, d).unwrap()
    };
    let gt = gen(0.3);
    let pred = gen(0.15);
    (pred, gt)
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Compares `evaluate` with a per-pixel double loop on random map pairs.
pub fn evaluate_equivalence(seed: u64, cases: usize) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    while checked < cases {
        let (pred, gt) = random_depth_pair(&mut rng, 8, 8);
        let (mut sq, mut abs, mut n, mut missing) = (0.0f64, 0.0f64, 0usize, 0usize);
        for y in 0..8 {
            for x in 0..8 {
                let (Some(g), p) = (gt.get(x, y), pred.get(x, y)) else { continue };
                match p {
                    None => missing += 1,
                    Some(p) => {
                        let e = (f64::from(p) - f64::from(g)) * 1000.0;
                        sq += e * e;
                        abs += e.abs();
                        n += 1;
                    }
                }
            }
        }
        let got = evaluate(&pred, &gt);
        if n == 0 {
            if got.is_ok() {
                return Err("expected NoOverlap".into());
            }
            continue;
        }
        let got = got.map_err(|e| e.to_string())?;
        let rmse = (sq / n as f64).sqrt();
        let mae = abs / n as f64;
        if !rel_close(got.rmse_mm, rmse)
            || !rel_close(got.mae_mm, mae)
            || got.evaluated_pixels != n
            || got.invalid_prediction_pixels != missing
        {
            return Err(format!("case {checked}: {got:?} vs rmse {rmse} mae {mae} n {n} missing {missing}"));
        }
        checked += 1;
    }
    Ok(())
}
