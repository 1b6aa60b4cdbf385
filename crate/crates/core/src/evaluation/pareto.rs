use std::cmp::Ordering;

use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ParetoError {
    #[error("point {index} has {found} objectives, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("point {0} has a non-finite objective")]
    NotFinite(usize),
}

/// `x` dominates `y` when it is at least as good everywhere and better
/// somewhere (all objectives maximized).
pub fn dominates(x: &[f64], y: &[f64]) -> bool {
    x.iter().zip(y).all(|(a, b)| a >= b) && x.iter().zip(y).any(|(a, b)| a > b)
}

/// Indices of the non-dominated points, ascending. Of several equal points
/// only the first is kept.
pub fn pareto_indices(points: &[Vec<f64>]) -> Result<Vec<usize>, ParetoError> {
    let Some(first) = points.first() else {
        return Ok(Vec::new());
    };
    let d = first.len();
    for (index, p) in points.iter().enumerate() {
        if p.len() != d {
            return Err(ParetoError::DimensionMismatch {
                index,
                expected: d,
                found: p.len(),
            });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(ParetoError::NotFinite(index));
        }
    }
    // In descending lexicographic order nothing can be dominated by a later
    // point, so one sweep against the front built so far suffices.
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[b]
            .iter()
            .zip(&points[a])
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut front: Vec<usize> = Vec::new();
    for i in order {
        let p = &points[i];
        if !front.iter().any(|&f| points[f] == *p || dominates(&points[f], p)) {
            front.push(i);
        }
    }
    front.sort_unstable();
    Ok(front)
}

/// The non-dominated subset of `points`, in input order.
pub fn pareto_front(points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, ParetoError> {
    Ok(pareto_indices(points)?.into_iter().map(|i| points[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(pareto_front(&[vec![1.0, 1.0]]).unwrap(), vec![vec![1.0, 1.0]]);
        let pts = vec![vec![1.0, 2.0], vec![2.0, 1.0], vec![0.0, 0.0]];
        assert_eq!(pareto_front(&pts).unwrap(), vec![vec![1.0, 2.0], vec![2.0, 1.0]]);
        let dup = vec![vec![1.0, 1.0], vec![1.0, 1.0], vec![0.5, 2.0]];
        assert_eq!(pareto_indices(&dup).unwrap(), vec![0, 2]);
    }

    #[test]
    fn dimension_mismatch() {
        let r = pareto_front(&[vec![1.0, 2.0], vec![1.0]]);
        assert!(matches!(r, Err(ParetoError::DimensionMismatch { index: 1, .. })));
    }
}
