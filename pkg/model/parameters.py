"""
Parameter Vectors
Packed estimator parameters with a named, contiguous block layout
"""

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np

from core.errors import DomainError


def beta_block(k: int) -> str:
    return f"beta[{k}]"


@dataclass(frozen=True)
class ParameterLayout:
    """Ordered named blocks (name, size) covering a vector exactly"""
    blocks: Tuple[Tuple[str, int], ...]
    labels: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        names = [name for name, _ in self.blocks]
        if len(set(names)) != len(names):
            raise DomainError("duplicate parameter block names", ", ".join(names))
        if any(size < 0 for _, size in self.blocks):
            raise DomainError("parameter block sizes must be nonnegative")
        if not self.labels:
            generated = []
            for name, size in self.blocks:
                generated.extend(f"{name}[{i}]" for i in range(size))
            object.__setattr__(self, 'labels', tuple(generated))
        elif len(self.labels) != self.size:
            raise DomainError("one label per parameter is required")

    @classmethod
    def build(cls, blocks: Sequence[Tuple[str, Sequence[str]]]) -> "ParameterLayout":
        """Layout from (block name, element labels) pairs"""
        labels = []
        for _, element_labels in blocks:
            labels.extend(element_labels)
        return cls(tuple((name, len(element_labels)) for name, element_labels in blocks), tuple(labels))

    @property
    def size(self) -> int:
        return sum(size for _, size in self.blocks)

    @property
    def names(self) -> List[str]:
        return [name for name, _ in self.blocks]

    def has(self, name: str) -> bool:
        return name in self.names

    def slice(self, name: str) -> slice:
        start = 0
        for block_name, size in self.blocks:
            if block_name == name:
                return slice(start, start + size)
            start += size
        raise DomainError(f"unknown parameter block '{name}'", f"blocks: {', '.join(self.names)}")

    def indices(self, name: str) -> np.ndarray:
        s = self.slice(name)
        return np.arange(s.start, s.stop)

    def block_labels(self, name: str) -> Tuple[str, ...]:
        return self.labels[self.slice(name)]

    def permuted(self, order: Sequence[str]) -> "ParameterLayout":
        """Same blocks in a different order"""
        if sorted(order) != sorted(self.names):
            raise DomainError("permutation must name every block exactly once")
        labels = []
        for name in order:
            labels.extend(self.block_labels(name))
        sizes = dict(self.blocks)
        return ParameterLayout(tuple((name, sizes[name]) for name in order), tuple(labels))

    def permutation_to(self, other: "ParameterLayout") -> np.ndarray:
        """Index array p such that values_in_other = values_in_self[p]"""
        return np.concatenate([self.indices(name) for name in other.names] or [np.zeros(0, dtype=int)])


@dataclass(frozen=True)
class ParameterVector:
    values: np.ndarray
    layout: ParameterLayout

    def __post_init__(self):
        values = np.array(self.values, dtype=float).ravel()
        if values.shape != (self.layout.size,):
            raise DomainError(f"parameter vector has {values.size} values, layout needs {self.layout.size}")
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @classmethod
    def pack(cls, layout: ParameterLayout, blocks: Mapping[str, Sequence[float]]) -> "ParameterVector":
        values = np.zeros(layout.size)
        for name in layout.names:
            if name not in blocks:
                raise DomainError(f"missing parameter block '{name}'")
            block = np.asarray(blocks[name], dtype=float).ravel()
            s = layout.slice(name)
            if block.size != s.stop - s.start:
                raise DomainError(f"block '{name}' needs {s.stop - s.start} values, got {block.size}")
            values[s] = block
        return cls(values, layout)

    def unpack(self) -> Dict[str, np.ndarray]:
        return {name: self.values[self.layout.slice(name)].copy() for name in self.layout.names}

    def block(self, name: str) -> np.ndarray:
        return self.values[self.layout.slice(name)]

    def with_values(self, values) -> "ParameterVector":
        return ParameterVector(values, self.layout)

    def reordered(self, layout: ParameterLayout) -> "ParameterVector":
        return ParameterVector(self.values[self.layout.permutation_to(layout)], layout)

    def beta_matrix(self, n_subtypes: int) -> np.ndarray:
        """(K, p) coefficient matrix from the beta[k] blocks"""
        return np.vstack([self.block(beta_block(k)) for k in range(1, n_subtypes + 1)])

    def as_dict(self) -> Dict[str, float]:
        return {label: float(v) for label, v in zip(self.layout.labels, self.values)}

