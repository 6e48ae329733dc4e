// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::Scalar;

/// A labelled point; both coordinates are maximized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint<T, L> {
    pub x: T,
    pub y: T,
    pub label: L,
}

impl<T, L> ParetoPoint<T, L> {
    pub fn new(x: T, y: T, label: L) -> Self {
        ParetoPoint { x, y, label }
    }
}

/// Non-dominated points, in input order. `Q` dominates `P` when it is at
/// least as good on both axes and strictly better on one, so coincident
/// points are all kept.
pub fn pareto_frontier<T: Scalar, L: Clone>(points: &[ParetoPoint<T, L>]) -> Vec<ParetoPoint<T, L>> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let (p, q) = (&points[a], &points[b]);
        q.x.partial_cmp(&p.x)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(q.y.partial_cmp(&p.y).unwrap_or(std::cmp::Ordering::Equal))
    });
    let mut keep = vec![false; points.len()];
    // Largest y among points with strictly larger x than the current group.
    let mut best_y: Option<T> = None;
    let mut i = 0;
    while i < order.len() {
        let x = points[order[i]].x;
        let group_max = points[order[i]].y;
        let mut j = i;
        while j < order.len() && points[order[j]].x == x {
            let p = &points[order[j]];
            keep[order[j]] = p.y == group_max && best_y.is_none_or(|b| group_max > b);
            j += 1;
        }
        best_y = Some(best_y.map_or(group_max, |b| b.max(group_max)));
        i = j;
    }
    points.iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| p.clone()).collect()
}
