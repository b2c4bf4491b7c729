//! Blocking: grouping units into homogeneous tuples from covariates, plus the
//! diagnostics that quantify how homogeneous the result is.

use crate::error::{Error, Result};
use crate::linalg::{inv_sqrt_sym, squared_distance, Mat};
use crate::sample::{BlockPartition, Sample};

/// Mean over blocks of the largest squared within-block covariate distance,
/// and the analogous cross-distance between adjacent block pairs. Both shrink
/// to zero as blocks become homogeneous.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockDiagnostics {
    pub within_stat: f64,
    pub adjacent_stat: f64,
}

pub fn diagnose(sample: &Sample, partition: &BlockPartition) -> Result<BlockDiagnostics> {
    let n = partition.n_blocks();
    let mut within = 0.0;
    for block in partition.blocks() {
        let mut worst = 0.0f64;
        for (a, &i) in block.iter().enumerate() {
            for &k in &block[a + 1..] {
                let d = squared_distance(
                    &sample.unit(i).covariates,
                    &sample.unit(k).covariates,
                );
                worst = worst.max(d);
            }
        }
        within += worst;
    }
    let mut adjacent = 0.0;
    for j in 0..n / 2 {
        let mut worst = 0.0f64;
        for &i in partition.block(2 * j) {
            for &k in partition.block(2 * j + 1) {
                let d = squared_distance(
                    &sample.unit(i).covariates,
                    &sample.unit(k).covariates,
                );
                worst = worst.max(d);
            }
        }
        adjacent += worst;
    }
    Ok(BlockDiagnostics {
        within_stat: within / n as f64,
        adjacent_stat: adjacent / n as f64,
    })
}

// Indices sorted by a scalar covariate, ties broken by unit id.
fn sorted_by_covariate(sample: &Sample, covariate_index: usize) -> Result<Vec<usize>> {
    if covariate_index >= sample.dim() {
        return Err(Error::CovariateIndex {
            index: covariate_index,
            dim: sample.dim(),
        });
    }
    let mut order: Vec<usize> = (0..sample.len()).collect();
    order.sort_by(|&a, &b| {
        let xa = sample.unit(a).covariates[covariate_index];
        let xb = sample.unit(b).covariates[covariate_index];
        xa.total_cmp(&xb)
            .then_with(|| sample.unit(a).id.cmp(&sample.unit(b).id))
    });
    Ok(order)
}

/// Order units by one scalar covariate and cut consecutive runs of size
/// `tuple_size` into blocks. Block order follows the sort.
pub fn block_by_ordering(
    sample: &Sample,
    tuple_size: usize,
    covariate_index: usize,
) -> Result<BlockPartition> {
    if tuple_size == 0 {
        return Err(Error::InvalidArgument("tuple size must be positive".into()));
    }
    if !sample.len().is_multiple_of(tuple_size) {
        return Err(Error::NotDivisible {
            count: sample.len(),
            divisor: tuple_size,
        });
    }
    let order = sorted_by_covariate(sample, covariate_index)?;
    let blocks = order.chunks(tuple_size).map(|c| c.to_vec()).collect();
    BlockPartition::new(blocks, sample.len())
}

/// Within each stratum, sort by the scalar covariate and cut blocks of
/// `tuple_size`; per stratum, `count mod tuple_size` leftover units are
/// dropped from the end of the sorted order (the worst-matched boundary).
/// Returns the partition plus the dropped unit indices. Block order: strata
/// in ascending label order, sorted order within.
pub fn block_prestratified(
    sample: &Sample,
    strata: &[usize],
    tuple_size: usize,
    covariate_index: usize,
) -> Result<(BlockPartition, Vec<usize>)> {
    if strata.len() != sample.len() {
        return Err(Error::LengthMismatch {
            context: "strata labels",
            expected: sample.len(),
            got: strata.len(),
        });
    }
    if tuple_size == 0 {
        return Err(Error::InvalidArgument("tuple size must be positive".into()));
    }
    let order = sorted_by_covariate(sample, covariate_index)?;
    let mut labels: Vec<usize> = strata.to_vec();
    labels.sort_unstable();
    labels.dedup();

    let mut blocks = Vec::new();
    let mut dropped = Vec::new();
    for label in labels {
        let members: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&i| strata[i] == label)
            .collect();
        let keep = members.len() - members.len() % tuple_size;
        for chunk in members[..keep].chunks(tuple_size) {
            blocks.push(chunk.to_vec());
        }
        dropped.extend_from_slice(&members[keep..]);
    }
    if blocks.is_empty() {
        return Err(Error::InvalidPartition(
            "every stratum is smaller than the tuple size".into(),
        ));
    }
    Ok((BlockPartition::new(blocks, sample.len())?, dropped))
}

/// Total squared-distance cost of a pairing.
pub fn matching_cost(points: &[Vec<f64>], pairs: &[(usize, usize)]) -> f64 {
    pairs
        .iter()
        .map(|&(i, j)| squared_distance(&points[i], &points[j]))
        .sum()
}

/// Greedy perfect matching: repeatedly take the globally closest unmatched
/// pair under squared Euclidean distance, breaking ties by the smaller index
/// pair. O(m^2 log m); not optimal in general.
pub fn greedy_nonbipartite_match(points: &[Vec<f64>]) -> Result<Vec<(usize, usize)>> {
    let m = points.len();
    if !m.is_multiple_of(2) {
        return Err(Error::OddPointCount(m));
    }
    let mut edges = Vec::with_capacity(m * (m - 1) / 2);
    for i in 0..m {
        for j in (i + 1)..m {
            edges.push((squared_distance(&points[i], &points[j]), i, j));
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used = vec![false; m];
    let mut pairs = Vec::with_capacity(m / 2);
    for (_, i, j) in edges {
        if !used[i] && !used[j] {
            used[i] = true;
            used[j] = true;
            pairs.push((i, j));
            if pairs.len() == m / 2 {
                break;
            }
        }
    }
    Ok(pairs)
}

/// Minimum total squared-distance perfect matching by exhaustive recursion.
/// Deterministic tie-break: the lexicographically smallest pairing among the
/// optima. Refused above 14 points.
pub fn exact_nonbipartite_match(points: &[Vec<f64>]) -> Result<Vec<(usize, usize)>> {
    let m = points.len();
    if !m.is_multiple_of(2) {
        return Err(Error::OddPointCount(m));
    }
    if m > 14 {
        return Err(Error::ExactMatchTooLarge(m));
    }
    if m == 0 {
        return Ok(Vec::new());
    }
    let mut dist = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            dist[i][j] = squared_distance(&points[i], &points[j]);
        }
    }
    let mut best_cost = f64::INFINITY;
    let mut best: Vec<(usize, usize)> = Vec::new();
    let mut current: Vec<(usize, usize)> = Vec::new();
    let mut used = vec![false; m];

    fn recurse(
        dist: &[Vec<f64>],
        used: &mut [bool],
        current: &mut Vec<(usize, usize)>,
        cost: f64,
        best_cost: &mut f64,
        best: &mut Vec<(usize, usize)>,
    ) {
        let first = match used.iter().position(|&u| !u) {
            Some(i) => i,
            None => {
                // strict improvement keeps the first (lexicographically
                // smallest) optimum
                if cost < *best_cost {
                    *best_cost = cost;
                    *best = current.clone();
                }
                return;
            }
        };
        if cost >= *best_cost {
            return;
        }
        used[first] = true;
        for j in (first + 1)..used.len() {
            if used[j] {
                continue;
            }
            used[j] = true;
            current.push((first, j));
            recurse(dist, used, current, cost + dist[first][j], best_cost, best);
            current.pop();
            used[j] = false;
        }
        used[first] = false;
    }

    recurse(
        &dist, &mut used, &mut current, 0.0, &mut best_cost, &mut best,
    );
    Ok(best)
}

/// Matching rule used inside recursive pairing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchMethod {
    Greedy,
    Exact,
}

/// Covariate standardization used for pairing distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Standardize {
    /// Scale each covariate by its marginal standard deviation.
    Diagonal,
    /// Sphere with the inverse square root of the full sample covariance
    /// (pseudo-inverse when singular).
    Full,
}

fn standardized_rows(sample: &Sample, standardize: Standardize) -> Result<Vec<Vec<f64>>> {
    let n = sample.len();
    let p = sample.dim();
    let mut means = vec![0.0; p];
    for u in sample.units() {
        for (m, &x) in means.iter_mut().zip(&u.covariates) {
            *m += x;
        }
    }
    for m in &mut means {
        *m /= n as f64;
    }
    match standardize {
        Standardize::Diagonal => {
            let mut sd = vec![0.0; p];
            for u in sample.units() {
                for j in 0..p {
                    let d = u.covariates[j] - means[j];
                    sd[j] += d * d;
                }
            }
            for s in &mut sd {
                *s = (*s / n as f64).sqrt();
                if *s == 0.0 {
                    *s = 1.0; // constant covariate carries no distance
                }
            }
            Ok(sample
                .units()
                .iter()
                .map(|u| {
                    u.covariates
                        .iter()
                        .zip(&sd)
                        .map(|(&x, &s)| x / s)
                        .collect()
                })
                .collect())
        }
        Standardize::Full => {
            let mut cov = Mat::zeros(p, p);
            for u in sample.units() {
                for a in 0..p {
                    for b in 0..p {
                        let v = cov.get(a, b)
                            + (u.covariates[a] - means[a]) * (u.covariates[b] - means[b])
                                / n as f64;
                        cov.set(a, b, v);
                    }
                }
            }
            let w = inv_sqrt_sym(&cov, 1e-12)?;
            Ok(sample
                .units()
                .iter()
                .map(|u| w.matvec(&u.covariates).expect("dimension checked"))
                .collect())
        }
    }
}

/// Build blocks of size 2^K by repeated pairing: units are paired on
/// standardized covariates, then pairs are paired on their covariate means,
/// and so on for K levels. Block order: ascending mean of the first covariate
/// (original scale), ties by smallest unit index.
pub fn block_recursive_pairing(
    sample: &Sample,
    k: usize,
    standardize: Standardize,
    method: MatchMethod,
) -> Result<BlockPartition> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "recursive pairing needs at least one level".into(),
        ));
    }
    let size = 1usize << k;
    if !sample.len().is_multiple_of(size) {
        return Err(Error::NotDivisible {
            count: sample.len(),
            divisor: size,
        });
    }
    let std_rows = standardized_rows(sample, standardize)?;

    // groups carry (member indices, mean of standardized covariates)
    let mut groups: Vec<(Vec<usize>, Vec<f64>)> = (0..sample.len())
        .map(|i| (vec![i], std_rows[i].clone()))
        .collect();
    for _level in 0..k {
        let points: Vec<Vec<f64>> = groups.iter().map(|g| g.1.clone()).collect();
        let pairs = match method {
            MatchMethod::Greedy => greedy_nonbipartite_match(&points)?,
            MatchMethod::Exact => exact_nonbipartite_match(&points)?,
        };
        let mut merged = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            let mut members = groups[a].0.clone();
            members.extend_from_slice(&groups[b].0);
            members.sort_unstable();
            let na = groups[a].0.len() as f64;
            let nb = groups[b].0.len() as f64;
            let mean: Vec<f64> = groups[a]
                .1
                .iter()
                .zip(&groups[b].1)
                .map(|(&x, &y)| (na * x + nb * y) / (na + nb))
                .collect();
            merged.push((members, mean));
        }
        groups = merged;
    }

    let mut blocks: Vec<Vec<usize>> = groups.into_iter().map(|g| g.0).collect();
    blocks.sort_by(|a, b| {
        let ma = a
            .iter()
            .map(|&i| sample.unit(i).covariates[0])
            .sum::<f64>()
            / a.len() as f64;
        let mb = b
            .iter()
            .map(|&i| sample.unit(i).covariates[0])
            .sum::<f64>()
            / b.len() as f64;
        ma.total_cmp(&mb).then_with(|| a[0].cmp(&b[0]))
    });
    BlockPartition::new(blocks, sample.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::Unit;

    fn scalar_sample(xs: &[f64]) -> Sample {
        let units = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| Unit {
                id: format!("u{i:02}"),
                covariates: vec![x],
                outcome: None,
                arm: None,
            })
            .collect();
        Sample::new(units, 2).unwrap()
    }

    fn vector_sample(rows: &[Vec<f64>]) -> Sample {
        let units = rows
            .iter()
            .enumerate()
            .map(|(i, r)| Unit {
                id: format!("u{i:02}"),
                covariates: r.clone(),
                outcome: None,
                arm: None,
            })
            .collect();
        Sample::new(units, 2).unwrap()
    }

    fn ids_of(sample: &Sample, block: &[usize]) -> Vec<String> {
        let mut v: Vec<String> = block.iter().map(|&i| sample.unit(i).id.clone()).collect();
        v.sort();
        v
    }

    #[test]
    fn ordering_sorts_then_cuts() {
        let s = scalar_sample(&[3.0, 1.0, 4.0, 2.0]);
        let p = block_by_ordering(&s, 2, 0).unwrap();
        assert_eq!(ids_of(&s, p.block(0)), vec!["u01", "u03"]); // x = 1, 2
        assert_eq!(ids_of(&s, p.block(1)), vec!["u00", "u02"]); // x = 3, 4
    }

    #[test]
    fn ordering_ties_break_by_id() {
        let s = scalar_sample(&[5.0, 5.0, 5.0, 5.0]);
        let p = block_by_ordering(&s, 2, 0).unwrap();
        assert_eq!(ids_of(&s, p.block(0)), vec!["u00", "u01"]);
        assert_eq!(ids_of(&s, p.block(1)), vec!["u02", "u03"]);
        assert_eq!(diagnose(&s, &p).unwrap().within_stat, 0.0);
    }

    #[test]
    fn ordering_rejects_bad_input() {
        let s = scalar_sample(&[1.0, 2.0, 3.0]);
        assert!(matches!(
            block_by_ordering(&s, 2, 0),
            Err(Error::NotDivisible { .. })
        ));
        let s = scalar_sample(&[1.0, 2.0]);
        assert!(matches!(
            block_by_ordering(&s, 2, 5),
            Err(Error::CovariateIndex { .. })
        ));
    }

    // All ways to split {0..8} into two unordered 4-sets.
    fn all_two_block_partitions() -> Vec<(Vec<usize>, Vec<usize>)> {
        let mut out = Vec::new();
        for mask in 0u32..256 {
            if mask.count_ones() == 4 && mask & 1 == 1 {
                let a: Vec<usize> = (0..8).filter(|&i| mask >> i & 1 == 1).collect();
                let b: Vec<usize> = (0..8).filter(|&i| mask >> i & 1 == 0).collect();
                out.push((a, b));
            }
        }
        assert_eq!(out.len(), 35);
        out
    }

    #[test]
    fn ordering_minimizes_within_stat_over_all_partitions() {
        // fixed "uniform" draws; any generic values work
        let xs = [0.93, 0.12, 0.55, 0.41, 0.78, 0.05, 0.67, 0.29];
        let s = scalar_sample(&xs);
        let sorted = block_by_ordering(&s, 4, 0).unwrap();
        let ours = diagnose(&s, &sorted).unwrap().within_stat;
        let mut others = Vec::new();
        for (a, b) in all_two_block_partitions() {
            let p = BlockPartition::new(vec![a, b], 8).unwrap();
            others.push(diagnose(&s, &p).unwrap().within_stat);
        }
        let min = others.iter().copied().fold(f64::INFINITY, f64::min);
        let mean = others.iter().sum::<f64>() / others.len() as f64;
        assert!(ours <= min + 1e-15);
        assert!(ours < mean);
    }

    #[test]
    fn ordering_invariant_to_row_order() {
        let xs = [0.5, -1.0, 2.25, 0.0, 3.5, -0.75];
        let s = scalar_sample(&xs);
        let base = block_by_ordering(&s, 2, 0).unwrap();
        let base_ids: Vec<Vec<String>> =
            base.blocks().iter().map(|b| ids_of(&s, b)).collect();
        // reversed row order, same ids attached to the same x values
        let units_rev: Vec<Unit> = (0..6)
            .rev()
            .map(|i| Unit {
                id: format!("u{i:02}"),
                covariates: vec![xs[i]],
                outcome: None,
                arm: None,
            })
            .collect();
        let s_rev = Sample::new(units_rev, 2).unwrap();
        let p_rev = block_by_ordering(&s_rev, 2, 0).unwrap();
        let rev_ids: Vec<Vec<String>> =
            p_rev.blocks().iter().map(|b| ids_of(&s_rev, b)).collect();
        assert_eq!(base_ids, rev_ids);
    }

    #[test]
    fn prestratified_single_stratum_reduces_to_ordering() {
        let s = scalar_sample(&[3.0, 1.0, 4.0, 2.0]);
        let (p, dropped) = block_prestratified(&s, &[7, 7, 7, 7], 2, 0).unwrap();
        assert!(dropped.is_empty());
        assert_eq!(p, block_by_ordering(&s, 2, 0).unwrap());
    }

    #[test]
    fn prestratified_drops_boundary_units() {
        let xs = [0.1, 0.2, 0.3, 0.4, 0.5, 1.1, 1.2, 1.3, 1.4];
        let strata = [0, 0, 0, 0, 0, 1, 1, 1, 1];
        let s = scalar_sample(&xs);
        let (p, dropped) = block_prestratified(&s, &strata, 4, 0).unwrap();
        assert_eq!(p.n_blocks(), 2);
        // stratum 0 has 5 units: the largest-x one is dropped
        assert_eq!(dropped, vec![4]);
        assert_eq!(ids_of(&s, p.block(0)), vec!["u00", "u01", "u02", "u03"]);
    }

    #[test]
    fn prestratified_blocks_never_straddle_strata() {
        let xs = [1.0, 1.0, 2.0, 2.0, 1.0, 1.0, 2.0, 2.0];
        let strata = [0, 0, 0, 0, 1, 1, 1, 1];
        let s = scalar_sample(&xs);
        let (p, dropped) = block_prestratified(&s, &strata, 2, 0).unwrap();
        assert!(dropped.is_empty());
        for b in p.blocks() {
            let labels: Vec<usize> = b.iter().map(|&i| strata[i]).collect();
            assert!(labels.windows(2).all(|w| w[0] == w[1]));
        }
    }

    #[test]
    fn greedy_matches_well_separated_pairs() {
        let pts = vec![vec![0.0], vec![10.0], vec![0.1], vec![9.9]];
        let mut pairs = greedy_nonbipartite_match(&pts).unwrap();
        pairs.sort();
        assert_eq!(pairs, vec![(0, 2), (1, 3)]);
        // separable configuration: greedy already optimal
        let exact = exact_nonbipartite_match(&pts).unwrap();
        assert_eq!(matching_cost(&pts, &pairs), matching_cost(&pts, &exact));
    }

    #[test]
    fn greedy_two_points_forced() {
        let pts = vec![vec![1.0, 2.0], vec![-1.0, 0.5]];
        assert_eq!(greedy_nonbipartite_match(&pts).unwrap(), vec![(0, 1)]);
        assert!(greedy_nonbipartite_match(&pts[..1]).is_err());
    }

    #[test]
    fn greedy_cost_at_least_exact_cost() {
        // six fixed points in the plane; oracle enumerates all 15 matchings
        let pts = vec![
            vec![0.3, 1.7],
            vec![-0.2, 0.4],
            vec![1.9, -0.6],
            vec![0.8, 0.8],
            vec![-1.5, -0.1],
            vec![2.2, 1.1],
        ];
        let greedy = matching_cost(&pts, &greedy_nonbipartite_match(&pts).unwrap());
        // brute force oracle, written independently of exact_nonbipartite_match
        let mut best = f64::INFINITY;
        let idx = [0, 1, 2, 3, 4, 5];
        for a in 1..6 {
            let rest: Vec<usize> = idx[1..].iter().copied().filter(|&x| x != a).collect();
            for b in 1..4 {
                let inner: Vec<usize> = rest
                    .iter()
                    .copied()
                    .filter(|&x| x != rest[0] && x != rest[b])
                    .collect();
                let cost = squared_distance(&pts[0], &pts[a])
                    + squared_distance(&pts[rest[0]], &pts[rest[b]])
                    + squared_distance(&pts[inner[0]], &pts[inner[1]]);
                best = best.min(cost);
            }
        }
        assert!(greedy >= best - 1e-12);
        let exact = matching_cost(&pts, &exact_nonbipartite_match(&pts).unwrap());
        assert!((exact - best).abs() < 1e-12);
    }

    #[test]
    fn exact_beats_greedy_on_chain_configuration() {
        // chain where the globally closest pair breaks the optimal pairing
        let pts = vec![
            vec![0.0],
            vec![1.0],
            vec![1.5],
            vec![2.5],
            vec![10.0],
            vec![11.0],
        ];
        let greedy = matching_cost(&pts, &greedy_nonbipartite_match(&pts).unwrap());
        let exact = matching_cost(&pts, &exact_nonbipartite_match(&pts).unwrap());
        assert!(exact < greedy - 1e-9, "exact {exact} vs greedy {greedy}");
    }

    #[test]
    fn exact_refuses_large_inputs() {
        let pts: Vec<Vec<f64>> = (0..16).map(|i| vec![i as f64]).collect();
        assert!(matches!(
            exact_nonbipartite_match(&pts),
            Err(Error::ExactMatchTooLarge(16))
        ));
    }

    #[test]
    fn recursive_k1_exact_equals_ordering_on_scalars() {
        // optimal pairing of scalars is adjacent-in-sort-order, which is
        // exactly the ordering construction; checked over many small draws
        let mut state = 88172645463325252u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for n in [2usize, 4, 6, 8] {
            for _ in 0..50 {
                let xs: Vec<f64> = (0..n).map(|_| next() * 10.0 - 5.0).collect();
                let s = scalar_sample(&xs);
                let by_order = block_by_ordering(&s, 2, 0).unwrap();
                let by_pairing =
                    block_recursive_pairing(&s, 1, Standardize::Diagonal, MatchMethod::Exact)
                        .unwrap();
                let a: Vec<Vec<String>> =
                    by_order.blocks().iter().map(|b| ids_of(&s, b)).collect();
                let mut b: Vec<Vec<String>> =
                    by_pairing.blocks().iter().map(|b| ids_of(&s, b)).collect();
                b.sort();
                let mut a_sorted = a.clone();
                a_sorted.sort();
                assert_eq!(a_sorted, b, "n={n} xs={xs:?}");
            }
        }
    }

    #[test]
    fn recursive_k2_merges_nearest_clusters() {
        // four tight clusters; two and two are near each other
        let rows = vec![
            vec![0.0, 0.0],
            vec![0.1, 0.0],
            vec![1.0, 0.0],
            vec![1.1, 0.0],
            vec![10.0, 0.0],
            vec![10.1, 0.0],
            vec![11.0, 0.0],
            vec![11.1, 0.0],
        ];
        let s = vector_sample(&rows);
        let p = block_recursive_pairing(&s, 2, Standardize::Diagonal, MatchMethod::Greedy)
            .unwrap();
        assert_eq!(p.n_blocks(), 2);
        assert_eq!(
            ids_of(&s, p.block(0)),
            vec!["u00", "u01", "u02", "u03"]
        );
        assert_eq!(
            ids_of(&s, p.block(1)),
            vec!["u04", "u05", "u06", "u07"]
        );
    }

    #[test]
    fn recursive_duplicate_rows_have_zero_within_stat() {
        let rows: Vec<Vec<f64>> = (0..8).map(|_| vec![2.5, -1.0]).collect();
        let s = vector_sample(&rows);
        for method in [MatchMethod::Greedy, MatchMethod::Exact] {
            let p = block_recursive_pairing(&s, 2, Standardize::Diagonal, method).unwrap();
            assert_eq!(diagnose(&s, &p).unwrap().within_stat, 0.0);
        }
    }

    #[test]
    fn recursive_full_standardization_runs() {
        let rows = vec![
            vec![0.0, 1.0],
            vec![0.5, 1.5],
            vec![4.0, -1.0],
            vec![4.5, -0.5],
        ];
        let s = vector_sample(&rows);
        let p = block_recursive_pairing(&s, 1, Standardize::Full, MatchMethod::Greedy).unwrap();
        assert_eq!(p.n_blocks(), 2);
    }

    #[test]
    fn diagnose_hand_values() {
        let s = scalar_sample(&[0.0, 1.0, 10.0, 12.0]);
        let p = BlockPartition::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
        let d = diagnose(&s, &p).unwrap();
        assert!((d.within_stat - 2.5).abs() < 1e-12);
        assert!((d.adjacent_stat - 72.0).abs() < 1e-12);
    }

    #[test]
    fn diagnose_single_block_has_zero_adjacent() {
        let s = scalar_sample(&[0.0, 1.0]);
        let p = BlockPartition::new(vec![vec![0, 1]], 2).unwrap();
        let d = diagnose(&s, &p).unwrap();
        assert_eq!(d.adjacent_stat, 0.0);
        assert_eq!(d.within_stat, 1.0);
    }

    #[test]
    fn diagnose_identical_covariates() {
        let s = scalar_sample(&[4.0; 6]);
        let p = block_by_ordering(&s, 3, 0).unwrap();
        let d = diagnose(&s, &p).unwrap();
        assert_eq!(d.within_stat, 0.0);
        assert_eq!(d.adjacent_stat, 0.0);
    }
}
