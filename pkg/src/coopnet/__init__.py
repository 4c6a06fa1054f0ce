"""Cooperative generator-discriminator reranking for abstractive summaries."""

__version__ = "0.1.0"
