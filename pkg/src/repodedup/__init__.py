"""Repository deduplication: cluster forge projects that share ancestry or
commits, elect each cluster's definitive project, and ship the mapping."""

__version__ = "0.1.0"
