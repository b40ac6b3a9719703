use std::collections::{HashMap, VecDeque};

use nalgebra::Vector3;

use super::PointCloud;

type Cell = (i64, i64, i64);

fn cell_of(p: &Vector3<f64>, size: f64) -> Cell {
    (
        (p.x / size).floor() as i64,
        (p.y / size).floor() as i64,
        (p.z / size).floor() as i64,
    )
}

/// Connected components of the graph joining points at distance ≤ `tol`.
///
/// Components smaller than `min_size` are dropped. Output is sorted by
/// descending size; equal sizes keep the order of their first point. Points
/// inside a component keep input order.
pub fn euclidean_cluster(cloud: &PointCloud, tol: f64, min_size: usize) -> Vec<PointCloud> {
    assert!(tol > 0.0, "cluster tolerance must be positive");
    let pts = cloud.points();
    let mut grid: HashMap<Cell, Vec<usize>> = HashMap::new();
    for (i, p) in pts.iter().enumerate() {
        grid.entry(cell_of(p, tol)).or_default().push(i);
    }

    let tol2 = tol * tol;
    let mut visited = vec![false; pts.len()];
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::new();
    for seed in 0..pts.len() {
        if visited[seed] {
            continue;
        }
        visited[seed] = true;
        queue.push_back(seed);
        let mut members = Vec::new();
        while let Some(i) = queue.pop_front() {
            members.push(i);
            let (cx, cy, cz) = cell_of(&pts[i], tol);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        let Some(bucket) = grid.get(&(cx + dx, cy + dy, cz + dz)) else {
                            continue;
                        };
                        for &j in bucket {
                            if !visited[j] && (pts[j] - pts[i]).norm_squared() <= tol2 {
                                visited[j] = true;
                                queue.push_back(j);
                            }
                        }
                    }
                }
            }
        }
        if members.len() >= min_size {
            members.sort_unstable();
            components.push(members);
        }
    }
    components.sort_by_key(|c| std::cmp::Reverse(c.len()));
    components
        .into_iter()
        .map(|m| PointCloud::from_finite(m.into_iter().map(|i| pts[i]).collect()))
        .collect()
}
