"""Metamodelling kernel: language definitions, conforming models, constraints,
prototype/clone derivation, metamodel merging and evolution reports."""

__version__ = "0.1.0"
