use serde::{Deserialize, Serialize};

use super::{GridError, GridGeometry};

/// Labels each cell of a grid with the component it belongs to, or `None`
/// when it lies outside the active domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainPartition {
    geometry: GridGeometry,
    labels: Vec<Option<usize>>,
    components: usize,
}

impl DomainPartition {
    pub fn from_labels(geometry: GridGeometry, labels: Vec<Option<usize>>) -> Result<Self, GridError> {
        if labels.len() != geometry.len() {
            return Err(GridError::LengthMismatch { expected: geometry.len(), found: labels.len() });
        }
        let components = labels.iter().flatten().max().map_or(0, |&m| m + 1);
        let mut seen = vec![false; components];
        for &l in labels.iter().flatten() {
            seen[l] = true;
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(GridError::InvalidPartition(format!("component {k} is empty")));
        }
        if components == 0 {
            return Err(GridError::InvalidPartition("no active cells".into()));
        }
        Ok(Self { geometry, labels, components })
    }

    /// One component per mask; masks must be pairwise disjoint.
    pub fn from_masks(geometry: GridGeometry, masks: &[Vec<bool>]) -> Result<Self, GridError> {
        let mut labels = vec![None; geometry.len()];
        for (k, mask) in masks.iter().enumerate() {
            if mask.len() != geometry.len() {
                return Err(GridError::LengthMismatch { expected: geometry.len(), found: mask.len() });
            }
            for (i, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
                if let Some(prev) = labels[i] {
                    return Err(GridError::InvalidPartition(format!(
                        "cell {i} belongs to components {prev} and {k}"
                    )));
                }
                labels[i] = Some(k);
            }
        }
        Self::from_labels(geometry, labels)
    }

    /// A single component covering `mask` (or the whole box).
    pub fn single(geometry: GridGeometry, mask: Option<&[bool]>) -> Result<Self, GridError> {
        let labels = match mask {
            Some(m) if m.len() != geometry.len() => {
                return Err(GridError::LengthMismatch { expected: geometry.len(), found: m.len() })
            }
            Some(m) => m.iter().map(|&a| a.then_some(0)).collect(),
            None => vec![Some(0); geometry.len()],
        };
        Self::from_labels(geometry, labels)
    }

    /// Two components split at coordinate `cut` along `axis`: cells strictly
    /// below go to component 0, the rest to component 1.
    pub fn halves(geometry: GridGeometry, axis: usize, cut: f64, mask: Option<&[bool]>) -> Result<Self, GridError> {
        if axis >= geometry.rank() {
            return Err(GridError::InvalidPartition(format!("axis {axis} out of range")));
        }
        let stride = geometry.strides()[axis];
        let n = geometry.extents()[axis];
        let labels = (0..geometry.len())
            .map(|flat| {
                if mask.is_some_and(|m| !m[flat]) {
                    return None;
                }
                let x = geometry.coordinate(axis, (flat / stride) % n);
                Some(usize::from(x >= cut))
            })
            .collect();
        Self::from_labels(geometry, labels)
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn labels(&self) -> &[Option<usize>] {
        &self.labels
    }

    pub fn component_count(&self) -> usize {
        self.components
    }

    pub fn active_mask(&self) -> Vec<bool> {
        self.labels.iter().map(Option::is_some).collect()
    }

    pub fn component_mask(&self, k: usize) -> Vec<bool> {
        self.labels.iter().map(|&l| l == Some(k)).collect()
    }

    pub fn active_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_some()).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom() -> GridGeometry {
        GridGeometry::cube(2, 4, -1.5, 1.5).unwrap()
    }

    #[test]
    fn overlapping_masks_rejected() {
        let a = vec![true; 16];
        let mut b = vec![false; 16];
        b[3] = true;
        assert!(matches!(
            DomainPartition::from_masks(geom(), &[a, b]),
            Err(GridError::InvalidPartition(_))
        ));
    }

    #[test]
    fn halves_split_on_axis() {
        let p = DomainPartition::halves(geom(), 0, 0.0, None).unwrap();
        assert_eq!(p.component_count(), 2);
        assert_eq!(p.component_mask(0).iter().filter(|&&m| m).count(), 8);
        assert_eq!(p.labels()[0], Some(0));
        assert_eq!(p.labels()[15], Some(1));
        assert_eq!(p.active_count(), 16);
    }

    #[test]
    fn single_with_mask_and_empty() {
        let mut m = vec![false; 16];
        m[5] = true;
        let p = DomainPartition::single(geom(), Some(&m)).unwrap();
        assert_eq!(p.active_mask(), m);
        assert!(DomainPartition::single(geom(), Some(&[false; 16])).is_err());
    }
}
