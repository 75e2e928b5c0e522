//! Named-register layouts and the global index convention.
//!
//! A layout is an ordered list of `(name, dim)` qudit registers. The global
//! basis index is big-endian in declared register order: the first register is
//! the most significant digit. Register subsets passed to operations are
//! always interpreted in the order given by the caller.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(String, usize)>", into = "Vec<(String, usize)>")]
pub struct RegisterLayout {
    registers: Vec<(String, usize)>,
}

impl RegisterLayout {
    pub fn new<S: Into<String>>(registers: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let registers: Vec<(String, usize)> = registers
            .into_iter()
            .map(|(name, dim)| (name.into(), dim))
            .collect();
        if registers.is_empty() {
            return Err(Error::InvalidLayout("layout has no registers".into()));
        }
        for (i, (name, dim)) in registers.iter().enumerate() {
            if *dim < 1 {
                return Err(Error::InvalidLayout(format!(
                    "register `{name}` has dimension 0"
                )));
            }
            if registers[..i].iter().any(|(other, _)| other == name) {
                return Err(Error::DuplicateRegister(name.clone()));
            }
        }
        Ok(Self { registers })
    }

    pub fn total_dim(&self) -> usize {
        self.registers.iter().map(|(_, d)| d).product()
    }

    pub fn len(&self) -> usize {
        self.registers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.registers.is_empty()
    }

    pub fn registers(&self) -> impl Iterator<Item = (&str, usize)> {
        self.registers.iter().map(|(n, d)| (n.as_str(), *d))
    }

    pub fn names(&self) -> Vec<&str> {
        self.registers.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.registers.iter().map(|(_, d)| *d).collect()
    }

    pub fn name_at(&self, position: usize) -> &str {
        &self.registers[position].0
    }

    pub fn dim_at(&self, position: usize) -> usize {
        self.registers[position].1
    }

    pub fn contains(&self, name: &str) -> bool {
        self.registers.iter().any(|(n, _)| n == name)
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.registers
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| Error::UnknownRegister(name.to_string()))
    }

    pub fn dim_of(&self, name: &str) -> Result<usize> {
        Ok(self.registers[self.position(name)?].1)
    }

    /// Big-endian strides: `strides[i]` is the product of all dims after `i`.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.registers.len()];
        for i in (0..self.registers.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.registers[i + 1].1;
        }
        strides
    }

    /// Global index of a full basis assignment. Every register must be
    /// assigned exactly once.
    pub fn index_of(&self, assignment: &[(&str, usize)]) -> Result<usize> {
        if assignment.len() != self.registers.len() {
            return Err(Error::InvalidLayout(format!(
                "assignment covers {} of {} registers",
                assignment.len(),
                self.registers.len()
            )));
        }
        let strides = self.strides();
        let mut seen = vec![false; self.registers.len()];
        let mut index = 0usize;
        for (name, value) in assignment {
            let p = self.position(name)?;
            if seen[p] {
                return Err(Error::DuplicateRegister(name.to_string()));
            }
            seen[p] = true;
            let dim = self.registers[p].1;
            if *value >= dim {
                return Err(Error::IndexOutOfRange {
                    register: name.to_string(),
                    index: *value,
                    dim,
                });
            }
            index += value * strides[p];
        }
        Ok(index)
    }

    /// Per-register digits of a global index, in layout order.
    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let strides = self.strides();
        let mut digits = Vec::with_capacity(self.registers.len());
        for stride in strides {
            digits.push(index / stride);
            index %= stride;
        }
        digits
    }

    /// Digit of a single register within a global index.
    pub fn digit(&self, index: usize, position: usize) -> usize {
        (index / self.strides()[position]) % self.registers[position].1
    }

    /// Positions of the given register names, in the given order.
    pub fn positions_of(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut positions = Vec::with_capacity(names.len());
        for name in names {
            let p = self.position(name)?;
            if positions.contains(&p) {
                return Err(Error::DuplicateRegister(name.to_string()));
            }
            positions.push(p);
        }
        Ok(positions)
    }

    /// Names not listed in `names`, in layout order.
    pub fn complement_of(&self, names: &[&str]) -> Result<Vec<String>> {
        let positions = self.positions_of(names)?;
        Ok(self
            .registers
            .iter()
            .enumerate()
            .filter(|(i, _)| !positions.contains(i))
            .map(|(_, (n, _))| n.clone())
            .collect())
    }

    /// Layout restricted to the given registers, in the given order.
    pub fn sub_layout(&self, names: &[&str]) -> Result<RegisterLayout> {
        let positions = self.positions_of(names)?;
        RegisterLayout::new(
            positions
                .into_iter()
                .map(|p| (self.registers[p].0.clone(), self.registers[p].1)),
        )
    }

    /// Concatenation of two layouts; names must stay unique.
    pub fn concat(&self, other: &RegisterLayout) -> Result<RegisterLayout> {
        RegisterLayout::new(
            self.registers
                .iter()
                .chain(other.registers.iter())
                .map(|(n, d)| (n.clone(), *d)),
        )
    }
}

impl TryFrom<Vec<(String, usize)>> for RegisterLayout {
    type Error = Error;

    fn try_from(registers: Vec<(String, usize)>) -> Result<Self> {
        RegisterLayout::new(registers)
    }
}

impl From<RegisterLayout> for Vec<(String, usize)> {
    fn from(layout: RegisterLayout) -> Self {
        layout.registers
    }
}

/// Precomputed index arithmetic for a register subset: every global index
/// splits as `target_offsets[t] + rest_offsets[r]`, where `t` runs big-endian
/// over the targets in caller order and `r` big-endian over the remaining
/// registers in layout order.
pub(crate) struct SubsetIndexer {
    pub target_dim: usize,
    pub rest_dim: usize,
    pub target_offsets: Vec<usize>,
    pub rest_offsets: Vec<usize>,
}

impl SubsetIndexer {
    pub fn new(layout: &RegisterLayout, targets: &[&str]) -> Result<Self> {
        let target_positions = layout.positions_of(targets)?;
        let rest_positions: Vec<usize> = (0..layout.len())
            .filter(|p| !target_positions.contains(p))
            .collect();
        let dims = layout.dims();
        let strides = layout.strides();
        let target_offsets = offsets_for(&target_positions, &dims, &strides);
        let rest_offsets = offsets_for(&rest_positions, &dims, &strides);
        Ok(Self {
            target_dim: target_offsets.len(),
            rest_dim: rest_offsets.len(),
            target_offsets,
            rest_offsets,
        })
    }

    #[inline]
    pub fn global(&self, target: usize, rest: usize) -> usize {
        self.target_offsets[target] + self.rest_offsets[rest]
    }
}

fn offsets_for(positions: &[usize], dims: &[usize], strides: &[usize]) -> Vec<usize> {
    let mut offsets = vec![0usize];
    for &p in positions {
        let mut next = Vec::with_capacity(offsets.len() * dims[p]);
        for &base in &offsets {
            for digit in 0..dims[p] {
                next.push(base + digit * strides[p]);
            }
        }
        offsets = next;
    }
    offsets
}
