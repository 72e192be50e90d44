use std::collections::VecDeque;

use super::{Geometry, Kernel, KernelParts, Side, NO_PARENT};

const THIRD: f64 = 1.0 / 3.0;

/// Two rooted binary trees of the given depth joined by the basis edge.
///
/// Every vertex below `depth` has three neighbours at probability 1/3; the
/// vertices at level `depth` hold the 2/3 that would go to their missing
/// children. Sites are numbered breadth-first from the left basis endpoint
/// (site 0); the right endpoint is site 1.
pub fn build_binary_tree(depth: u32) -> Kernel {
    let per_side = (1usize << (depth + 1)) - 1;
    let n = 2 * per_side;
    let mut levels = Vec::with_capacity(n);
    let mut sides = Vec::with_capacity(n);
    let mut parents = Vec::with_capacity(n);
    let mut rows: Vec<Vec<(u32, f64)>> = Vec::with_capacity(n);

    let mut push = |level: u32, side: Side, parent: u32, rows: &mut Vec<Vec<(u32, f64)>>| {
        levels.push(level);
        sides.push(side);
        parents.push(parent);
        rows.push(Vec::with_capacity(3));
        rows.len() - 1
    };

    let l0 = push(0, Side::L, NO_PARENT, &mut rows);
    let r0 = push(0, Side::R, NO_PARENT, &mut rows);
    rows[l0].push((r0 as u32, THIRD));
    rows[r0].push((l0 as u32, THIRD));

    let mut queue = VecDeque::from([l0, r0]);
    let mut level_of = vec![0u32, 0u32];
    let mut side_of = vec![Side::L, Side::R];
    while let Some(v) = queue.pop_front() {
        let level = level_of[v];
        if level == depth {
            continue;
        }
        for _ in 0..2 {
            let c = push(level + 1, side_of[v], v as u32, &mut rows);
            level_of.push(level + 1);
            side_of.push(side_of[v]);
            rows[v].push((c as u32, THIRD));
            rows[c].push((v as u32, THIRD));
            queue.push_back(c);
        }
    }
    debug_assert_eq!(rows.len(), n);

    let escape: Vec<f64> = level_of
        .iter()
        .map(|&l| if l == depth { 2.0 * THIRD } else { 0.0 })
        .collect();
    Kernel::from_parts(KernelParts {
        geometry: Geometry::BinaryTree { depth },
        levels,
        sides,
        coords: Vec::new(),
        parents,
        rows,
        holding: escape.clone(),
        escape,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_zero_is_two_sites() {
        let k = build_binary_tree(0);
        assert_eq!(k.len(), 2);
        assert!((k.p(0, 1) - 1.0 / 3.0).abs() < 1e-16);
        assert!((k.holding(0) - 2.0 / 3.0).abs() < 1e-16);
        assert!((k.holding(1) - 2.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn level_counts_double() {
        let k = build_binary_tree(2);
        assert_eq!(k.len(), 14);
        let count = |side, level| {
            (0..k.len())
                .filter(|&x| k.side(x) == Some(side) && k.level(x) == level)
                .count()
        };
        assert_eq!(count(Side::L, 1), 2);
        let k = build_binary_tree(6);
        for lvl in 0..=6 {
            assert_eq!(
                (0..k.len())
                    .filter(|&x| k.side(x) == Some(Side::L) && k.level(x) == lvl)
                    .count(),
                1 << lvl
            );
        }
    }

    #[test]
    fn rows_stochastic_and_symmetric() {
        let k = build_binary_tree(4);
        assert_eq!(k.symmetry_defect(), 0.0);
        assert!(k.is_irreducible());
        for x in 0..k.len() {
            assert!((k.row_sum(x) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_distance_matches_bfs() {
        let k = build_binary_tree(4);
        for x in [0usize, 1, 5, 17, 40] {
            let bfs = k.distances_from(x);
            for y in 0..k.len() {
                assert_eq!(k.distance(x, y), bfs[y], "x={x} y={y}");
            }
        }
    }

    #[test]
    fn breadth_first_order_from_left_endpoint() {
        let k = build_binary_tree(3);
        assert_eq!(k.side(0), Some(Side::L));
        assert_eq!(k.side(1), Some(Side::R));
        let d = k.distances_from(0);
        assert!(d.windows(2).all(|w| w[0] <= w[1]));
    }
}
