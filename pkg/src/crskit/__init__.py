"""crskit: finite groupoids, crossed complexes, Postnikov towers, torsors,
and the classifying-complex ladder."""

__version__ = "0.1.0"
