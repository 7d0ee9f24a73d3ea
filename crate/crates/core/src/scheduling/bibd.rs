//! Cyclic-window block design.
//!
//! Over a fixed enumeration `v_0 .. v_{n-1}`, block `i` is
//! `{v_i, v_{i+1}, .., v_{i+B-1}}` with indices mod `n`. That gives `n`
//! blocks of `B` distinct nodes, and each node lies in exactly `B` of them,
//! for every `1 <= B <= n`.

use std::io::{self, Write};

use super::{NodeId, SchedulingError};

pub fn build_bibd<T: Clone>(nodes: &[T], block_size: usize) -> Result<Vec<Vec<T>>, SchedulingError> {
    let n = nodes.len();
    if block_size == 0 || block_size > n {
        return Err(SchedulingError::InvalidDesign {
            block_size,
            nodes: n,
        });
    }
    Ok((0..n)
        .map(|i| (0..block_size).map(|k| nodes[(i + k) % n].clone()).collect())
        .collect())
}

/// A design plus the cursor walking it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDesign<T> {
    blocks: Vec<Vec<T>>,
    cursor: usize,
}

impl<T: NodeId> BlockDesign<T> {
    pub fn new(nodes: &[T], block_size: usize) -> Result<Self, SchedulingError> {
        Ok(Self {
            blocks: build_bibd(nodes, block_size)?,
            cursor: 0,
        })
    }

    pub fn blocks(&self) -> &[Vec<T>] {
        &self.blocks
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    /// Returns the block under the cursor and advances it cyclically.
    pub fn next_cluster(&mut self) -> Result<Vec<T>, SchedulingError> {
        if self.blocks.is_empty() {
            return Err(SchedulingError::EmptyDesign);
        }
        let block = self.blocks[self.cursor].clone();
        self.cursor = (self.cursor + 1) % self.blocks.len();
        Ok(block)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "block,members")?;
        for (i, b) in self.blocks.iter().enumerate() {
            let members: Vec<String> = b.iter().map(ToString::to_string).collect();
            writeln!(out, "{i},{}", members.join(" "))?;
        }
        Ok(())
    }
}
