"""Multitiered consortium data archive.

Versioned records with files, community-scoped sharing, tokenized share
links, anonymized usage statistics, metadata export, a REST API and a
CLI client.
"""

__version__ = "0.1.0"
