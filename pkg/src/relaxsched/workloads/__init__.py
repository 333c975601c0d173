"""Concrete incremental workloads and seeded instance generation."""

from ..errors import InputError
from .bst import BstSortWorkload
from .dag import SyntheticDagWorkload, generate_dag
from .delaunay import DelaunayWorkload, sequential_dependency_oracle

WORKLOAD_KINDS = ("bst-sort", "delaunay", "dag")


def generate_instance(kind, n, rng_seed, **kwargs):
    """Seeded instance factory; identical (kind, n, rng_seed) arguments
    yield identical instances."""
    if n < 1:
        raise InputError("n must be >= 1")
    if kind == "bst-sort":
        return BstSortWorkload.generate(n, rng_seed)
    if kind == "delaunay":
        return DelaunayWorkload.generate(n, rng_seed)
    if kind == "dag":
        return generate_dag(kwargs.pop("dag_kind", "1/i-tail"), n, rng_seed,
                            **kwargs)
    raise InputError(f"unknown workload kind {kind!r}")


__all__ = [
    "BstSortWorkload",
    "DelaunayWorkload",
    "SyntheticDagWorkload",
    "generate_dag",
    "generate_instance",
    "sequential_dependency_oracle",
    "WORKLOAD_KINDS",
]
