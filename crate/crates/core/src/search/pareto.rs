//! Dominance machinery shared by the multi-objective engines.
//!
//! Points are fixed-size objective vectors in which every component is
//! maximized. A (quality, storage) pair maps to `[quality, -storage]`.

use alloc::vec;
use alloc::vec::Vec;

/// `a` dominates `b`: no worse everywhere, strictly better somewhere.
pub fn dominates<const N: usize>(a: &[f64; N], b: &[f64; N]) -> bool {
    let mut strictly = false;
    for i in 0..N {
        if a[i] < b[i] {
            return false;
        }
        if a[i] > b[i] {
            strictly = true;
        }
    }
    strictly
}

/// Objective vector for "maximize quality, minimize storage".
pub fn qs_point(quality: f64, storage: f64) -> [f64; 2] {
    [quality, -storage]
}

/// Fast non-dominated sort. Returns fronts of indices, best first; indices
/// within a front are ascending.
pub fn nondominated_sort<const N: usize>(points: &[[f64; N]]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by_me: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if dominates(&points[i], &points[j]) {
                dominated_by_me[i].push(j);
                domination_count[j] += 1;
            } else if dominates(&points[j], &points[i]) {
                dominated_by_me[j].push(i);
                domination_count[i] += 1;
            }
        }
    }

    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| domination_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by_me[i] {
                domination_count[j] -= 1;
                if domination_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance of each member of `front` (same order as `front`).
/// Boundary members get `+inf`; a flat objective contributes nothing.
#[allow(clippy::needless_range_loop)]
pub fn crowding_distance<const N: usize>(points: &[[f64; N]], front: &[usize]) -> Vec<f64> {
    let m = front.len();
    let mut dist = vec![0.0f64; m];
    if m <= 2 {
        return vec![f64::INFINITY; m];
    }
    let mut order: Vec<usize> = (0..m).collect();
    for k in 0..N {
        order.sort_by(|&a, &b| {
            points[front[a]][k]
                .total_cmp(&points[front[b]][k])
                .then(a.cmp(&b))
        });
        let lo = points[front[order[0]]][k];
        let hi = points[front[order[m - 1]]][k];
        dist[order[0]] = f64::INFINITY;
        dist[order[m - 1]] = f64::INFINITY;
        let span = hi - lo;
        if span <= 0.0 {
            continue;
        }
        for w in 1..m - 1 {
            let gap = points[front[order[w + 1]]][k] - points[front[order[w - 1]]][k];
            dist[order[w]] += gap / span;
        }
    }
    dist
}

fn distance<const N: usize>(a: &[f64; N], b: &[f64; N]) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        let d = a[i] - b[i];
        s += d * d;
    }
    libm::sqrt(s)
}

/// SPEA-2 fitness (lower is better). Strength is the number of points a
/// point dominates; raw fitness sums the strengths of a point's dominators;
/// density is `1 / (σ_k + 2)` where `σ_k` is the distance to the k-th
/// nearest other point, `k = floor(sqrt(N))`.
pub fn spea2_fitness<const N: usize>(points: &[[f64; N]]) -> Vec<f64> {
    let n = points.len();
    let mut strength = vec![0usize; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && dominates(&points[i], &points[j]) {
                strength[i] += 1;
            }
        }
    }
    let k = libm::floor(libm::sqrt(n as f64)) as usize;
    (0..n)
        .map(|i| {
            let raw: usize = (0..n)
                .filter(|&j| j != i && dominates(&points[j], &points[i]))
                .map(|j| strength[j])
                .sum();
            let mut d: Vec<f64> = (0..n)
                .filter(|&j| j != i)
                .map(|j| distance(&points[i], &points[j]))
                .collect();
            d.sort_by(f64::total_cmp);
            let sigma = match d.len() {
                0 => 0.0,
                len => d[k.clamp(1, len) - 1],
            };
            raw as f64 + 1.0 / (sigma + 2.0)
        })
        .collect()
}

/// SPEA-2 environmental selection of `size` indices from `points`.
/// Non-dominated points (fitness < 1) are kept first; overflow is trimmed by
/// repeatedly dropping the point closest to its neighbours, underflow is
/// filled with the best remaining fitness. Returned indices are ascending.
pub fn spea2_select<const N: usize>(points: &[[f64; N]], size: usize) -> Vec<usize> {
    let fitness = spea2_fitness(points);
    let mut archive: Vec<usize> = (0..points.len()).filter(|&i| fitness[i] < 1.0).collect();

    if archive.len() < size {
        let mut rest: Vec<usize> = (0..points.len()).filter(|&i| fitness[i] >= 1.0).collect();
        rest.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]).then(a.cmp(&b)));
        archive.extend(rest.into_iter().take(size - archive.len()));
    }

    while archive.len() > size {
        // sorted neighbour distances per archive member; drop the
        // lexicographically smallest list, ties to the later index
        let lists: Vec<Vec<f64>> = archive
            .iter()
            .map(|&i| {
                let mut d: Vec<f64> = archive
                    .iter()
                    .filter(|&&j| j != i)
                    .map(|&j| distance(&points[i], &points[j]))
                    .collect();
                d.sort_by(f64::total_cmp);
                d
            })
            .collect();
        let mut victim = 0;
        for cand in 1..archive.len() {
            let ord = lists[cand]
                .iter()
                .zip(&lists[victim])
                .map(|(a, b)| a.total_cmp(b))
                .find(|o| o.is_ne())
                .unwrap_or(core::cmp::Ordering::Equal);
            if ord.is_le() {
                victim = cand;
            }
        }
        archive.remove(victim);
    }
    archive.sort_unstable();
    archive
}

/// NSGA-II environmental selection: whole fronts first, the last front cut
/// by descending crowding distance. Returned indices are ascending.
pub fn nsga2_select<const N: usize>(points: &[[f64; N]], size: usize) -> Vec<usize> {
    let mut chosen = Vec::with_capacity(size);
    for front in nondominated_sort(points) {
        if chosen.len() + front.len() <= size {
            chosen.extend_from_slice(&front);
        } else {
            let dist = crowding_distance(points, &front);
            let mut order: Vec<usize> = (0..front.len()).collect();
            order.sort_by(|&a, &b| dist[b].total_cmp(&dist[a]).then(front[a].cmp(&front[b])));
            let missing = size - chosen.len();
            chosen.extend(order.into_iter().take(missing).map(|w| front[w]));
        }
        if chosen.len() == size {
            break;
        }
    }
    chosen.sort_unstable();
    chosen
}

/// Front rank (0 = best) and crowding distance for every point.
pub fn rank_and_crowding<const N: usize>(points: &[[f64; N]]) -> (Vec<usize>, Vec<f64>) {
    let mut rank = vec![0; points.len()];
    let mut crowd = vec![0.0; points.len()];
    for (r, front) in nondominated_sort(points).into_iter().enumerate() {
        let d = crowding_distance(points, &front);
        for (w, &i) in front.iter().enumerate() {
            rank[i] = r;
            crowd[i] = d[w];
        }
    }
    (rank, crowd)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(qs: &[(f64, f64)]) -> Vec<[f64; 2]> {
        qs.iter().map(|&(q, s)| qs_point(q, s)).collect()
    }

    #[test]
    fn hand_fronts() {
        let p = pts(&[(0.9, 10.0), (0.8, 5.0), (0.7, 20.0)]);
        assert_eq!(nondominated_sort(&p), vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn single_and_empty() {
        assert_eq!(nondominated_sort(&pts(&[(0.5, 1.0)])), vec![vec![0]]);
        assert!(nondominated_sort::<2>(&[]).is_empty());
    }

    #[test]
    fn identical_points_share_front() {
        let p = pts(&[(0.5, 1.0); 4]);
        assert_eq!(nondominated_sort(&p), vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn spea2_chain() {
        // a dominates b dominates c
        let p = pts(&[(0.9, 1.0), (0.8, 2.0), (0.7, 3.0)]);
        let f = spea2_fitness(&p);
        assert!(f[0] < 1.0);
        assert!((f[1] - 2.0).abs() < 1.0 && f[1] >= 2.0);
        assert!(f[2] >= 3.0 && f[2] < 4.0);
    }

    #[test]
    fn spea2_duplicates_equal() {
        let p = pts(&[(0.5, 1.0), (0.5, 1.0), (0.9, 3.0)]);
        let f = spea2_fitness(&p);
        assert_eq!(f[0], f[1]);
    }

    #[test]
    fn crowding_boundaries_infinite() {
        let p = pts(&[(0.9, 9.0), (0.5, 5.0), (0.1, 1.0), (0.6, 6.0)]);
        let d = crowding_distance(&p, &[0, 1, 2, 3]);
        assert!(d[0].is_infinite() && d[2].is_infinite());
        assert!(d[1].is_finite() && d[3].is_finite());
    }

    #[test]
    fn nsga2_select_prefers_first_front() {
        let p = pts(&[(0.9, 10.0), (0.8, 5.0), (0.7, 20.0), (0.95, 30.0)]);
        assert_eq!(nsga2_select(&p, 3), vec![0, 1, 3]);
    }

    #[test]
    fn spea2_select_sizes() {
        let p = pts(&[
            (0.9, 10.0),
            (0.8, 5.0),
            (0.7, 20.0),
            (0.95, 30.0),
            (0.1, 50.0),
        ]);
        assert_eq!(spea2_select(&p, 3), vec![0, 1, 3]);
        assert_eq!(spea2_select(&p, 4).len(), 4);
        assert_eq!(spea2_select(&p, 2).len(), 2);
    }
}
