//! Per-class FIFO feature queues and their means (the class prototypes).

use std::collections::VecDeque;

use crate::error::{Error, Result};

pub const DEFAULT_QUEUE_CAPACITY: usize = 64;

#[derive(Debug, Clone, PartialEq)]
struct ClassQueue {
    items: VecDeque<Vec<f64>>,
    mean: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeBank {
    dim: usize,
    capacity: usize,
    queues: Vec<ClassQueue>,
}

impl PrototypeBank {
    pub fn new(num_classes: usize, dim: usize, capacity: usize) -> Result<Self> {
        if num_classes == 0 || dim == 0 || capacity == 0 {
            return Err(Error::config(
                "prototype bank needs at least one class, dimension and slot",
            ));
        }
        let queue = ClassQueue {
            items: VecDeque::with_capacity(capacity),
            mean: vec![0.0; dim],
        };
        Ok(Self {
            dim,
            capacity,
            queues: vec![queue; num_classes],
        })
    }

    pub fn num_classes(&self) -> usize {
        self.queues.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn queue_len(&self, class: usize) -> usize {
        self.queues.get(class).map_or(0, |q| q.items.len())
    }

    pub fn queue(&self, class: usize) -> impl Iterator<Item = &[f64]> {
        self.queues[class].items.iter().map(Vec::as_slice)
    }

    pub fn is_seeded(&self) -> bool {
        self.queues.iter().all(|q| !q.items.is_empty())
    }

    /// Appends `feature` to class `class`, evicting the oldest entry when full.
    pub fn push(&mut self, class: usize, feature: &[f64]) -> Result<()> {
        if feature.len() != self.dim {
            return Err(Error::domain(format!(
                "feature has dimension {}, bank expects {}",
                feature.len(),
                self.dim
            )));
        }
        let capacity = self.capacity;
        let classes = self.queues.len();
        let q = self
            .queues
            .get_mut(class)
            .ok_or_else(|| Error::domain(format!("class {class} outside 0..{classes}")))?;
        if q.items.len() == capacity {
            q.items.pop_front();
        }
        q.items.push_back(feature.to_vec());
        // recomputed from scratch so the cache never drifts from the contents
        let n = q.items.len() as f64;
        q.mean.iter_mut().for_each(|m| *m = 0.0);
        for item in &q.items {
            for (m, v) in q.mean.iter_mut().zip(item) {
                *m += v;
            }
        }
        q.mean.iter_mut().for_each(|m| *m /= n);
        Ok(())
    }

    pub fn prototype(&self, class: usize) -> Result<&[f64]> {
        match self.queues.get(class) {
            Some(q) if !q.items.is_empty() => Ok(&q.mean),
            Some(_) => Err(Error::UnseededClass(class)),
            None => Err(Error::domain(format!("class {class} outside 0..{}", self.queues.len()))),
        }
    }

    /// Current prototypes in class order.
    pub fn prototypes(&self) -> Result<Vec<Vec<f64>>> {
        (0..self.queues.len())
            .map(|k| self.prototype(k).map(<[f64]>::to_vec))
            .collect()
    }
}
