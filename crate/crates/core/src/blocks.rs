//! Partition of the variable vector into per-camera blocks.

use std::fmt;
use std::ops::Range;

/// Error returned when block spans do not partition `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid block structure: {0}")]
pub struct BlockError(pub String);

/// Ordered, disjoint, contiguous index ranges covering `0..n`.
#[derive(Clone, PartialEq, Eq)]
pub struct BlockStructure {
    spans: Vec<Range<usize>>,
    dim: usize,
}

impl BlockStructure {
    /// Builds consecutive blocks with the given widths.
    pub fn from_widths(widths: &[usize]) -> Result<Self, BlockError> {
        if widths.is_empty() {
            return Err(BlockError("at least one block is required".into()));
        }
        let mut spans = Vec::with_capacity(widths.len());
        let mut start = 0;
        for (m, &w) in widths.iter().enumerate() {
            if w == 0 {
                return Err(BlockError(format!("block {m} has zero width")));
            }
            spans.push(start..start + w);
            start += w;
        }
        Ok(Self { spans, dim: start })
    }

    /// Validates an explicit list of spans.
    pub fn from_spans(spans: Vec<Range<usize>>) -> Result<Self, BlockError> {
        if spans.is_empty() {
            return Err(BlockError("at least one block is required".into()));
        }
        let mut expected = 0;
        for (m, span) in spans.iter().enumerate() {
            if span.start != expected {
                return Err(BlockError(format!(
                    "block {m} starts at {} but {expected} was expected",
                    span.start
                )));
            }
            if span.end <= span.start {
                return Err(BlockError(format!("block {m} is empty")));
            }
            expected = span.end;
        }
        Ok(Self {
            spans,
            dim: expected,
        })
    }

    /// `m` blocks of identical width.
    pub fn uniform(m: usize, width: usize) -> Result<Self, BlockError> {
        Self::from_widths(&vec![width; m])
    }

    /// One block per coordinate.
    pub fn coordinates(n: usize) -> Result<Self, BlockError> {
        Self::uniform(n, 1)
    }

    pub fn len(&self) -> usize {
        self.spans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    /// Total dimension `n`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn span(&self, m: usize) -> Range<usize> {
        self.spans[m].clone()
    }

    pub fn width(&self, m: usize) -> usize {
        self.spans[m].len()
    }

    pub fn spans(&self) -> &[Range<usize>] {
        &self.spans
    }

    /// Block owning coordinate `i`.
    pub fn block_of(&self, i: usize) -> usize {
        self.spans
            .iter()
            .position(|s| s.contains(&i))
            .expect("coordinate outside block structure")
    }

    /// The coordinates of block `m` inside `x`.
    pub fn slice<'a>(&self, x: &'a [f64], m: usize) -> &'a [f64] {
        &x[self.spans[m].clone()]
    }
}

impl fmt::Debug for BlockStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.spans.iter()).finish()
    }
}
