"""dgforge: exact-arithmetic homological algebra.

Cubical enrichments of DG categories, twisted complexes, and hypercohomology
on finite sites, all over Z or Q with no floating point anywhere.
"""

__version__ = "0.1.0"
