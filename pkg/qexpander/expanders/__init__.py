"""Expander constructions and spectral certificates for graphs, groups and quantum channels."""
