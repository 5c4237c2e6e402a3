"""A minimal dependent type checker with pushout higher inductive types,
function extensionality, and univalence, plus a tiered formal library and a
batch-checking CLI."""

__version__ = "0.1.0"
